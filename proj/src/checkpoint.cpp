#include "osmcaa/checkpoint.hpp"

#include <bit>
#include <cstring>

#include "osmcaa/errors.hpp"
#include "osmcaa/io_util.hpp"

namespace osmcaa {
namespace {

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

void put_tensor(std::string& out, const Matrix& m) {
  for (const double v : m.values()) put_f64(out, v);
}

void put_tensor(std::string& out, const std::vector<double>& v) {
  for (const double x : v) put_f64(out, x);
}

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + static_cast<std::size_t>(i)])) << (8 * i);
    pos_ += 4;
    return v;
  }

  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + static_cast<std::size_t>(i)])) << (8 * i);
    pos_ += 8;
    return v;
  }

  double f64() { return std::bit_cast<double>(u64()); }

  void tensor(Matrix& m) {
    for (double& v : m.values()) v = f64();
  }

  void tensor(std::vector<double>& v) {
    for (double& x : v) x = f64();
  }

  std::string blob(std::size_t n) {
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  void raw(char* dst, std::size_t n) {
    need(n);
    std::memcpy(dst, bytes_.data() + pos_, n);
    pos_ += n;
  }

  bool exhausted() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) throw IoError("checkpoint truncated");
  }

  const std::string& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  std::string out;
  out.append(kCheckpointMagic, sizeof(kCheckpointMagic));
  put_u32(out, kCheckpointVersion);
  put_u32(out, static_cast<std::uint32_t>(ckpt.dims.input_dim));
  put_u32(out, static_cast<std::uint32_t>(ckpt.dims.hidden_dim));
  put_u32(out, static_cast<std::uint32_t>(ckpt.dims.embed_dim));
  put_u32(out, static_cast<std::uint32_t>(ckpt.dims.num_classes));
  put_u64(out, ckpt.next_epoch);
  put_f64(out, ckpt.lr);
  put_f64(out, ckpt.momentum);
  put_tensor(out, ckpt.params.w1);
  put_tensor(out, ckpt.params.b1);
  put_tensor(out, ckpt.params.w2);
  put_tensor(out, ckpt.params.b2);
  put_tensor(out, ckpt.params.ctx.vectors);
  put_tensor(out, ckpt.velocity.w1);
  put_tensor(out, ckpt.velocity.b1);
  put_tensor(out, ckpt.velocity.w2);
  put_tensor(out, ckpt.velocity.b2);
  put_tensor(out, ckpt.velocity.ctx);
  put_u64(out, ckpt.config_echo.size());
  out += ckpt.config_echo;
  write_file_atomic(path, out);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  Reader r(bytes);

  char magic[sizeof(kCheckpointMagic)];
  r.raw(magic, sizeof(magic));
  if (std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0)
    throw IoError("not a checkpoint file: bad magic in " + path.string());
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion)
    throw IoError("unsupported checkpoint version " + std::to_string(version));

  Checkpoint ckpt;
  ckpt.dims.input_dim = static_cast<int>(r.u32());
  ckpt.dims.hidden_dim = static_cast<int>(r.u32());
  ckpt.dims.embed_dim = static_cast<int>(r.u32());
  ckpt.dims.num_classes = static_cast<int>(r.u32());
  if (ckpt.dims.input_dim < 1 || ckpt.dims.hidden_dim < 1 ||
      ckpt.dims.embed_dim < 1 || ckpt.dims.num_classes < 1)
    throw IoError("checkpoint has non-positive dimensions");
  ckpt.next_epoch = r.u64();
  ckpt.lr = r.f64();
  ckpt.momentum = r.f64();

  const auto h = static_cast<std::size_t>(ckpt.dims.hidden_dim);
  const auto d_in = static_cast<std::size_t>(ckpt.dims.input_dim);
  const auto d = static_cast<std::size_t>(ckpt.dims.embed_dim);
  const auto c = static_cast<std::size_t>(ckpt.dims.num_classes);
  ckpt.params.w1 = Matrix(h, d_in);
  ckpt.params.b1.resize(h);
  ckpt.params.w2 = Matrix(d, h);
  ckpt.params.b2.resize(d);
  ckpt.params.ctx.vectors = Matrix(c, d);
  r.tensor(ckpt.params.w1);
  r.tensor(ckpt.params.b1);
  r.tensor(ckpt.params.w2);
  r.tensor(ckpt.params.b2);
  r.tensor(ckpt.params.ctx.vectors);
  ckpt.velocity = ParamTensors::zeros_like(ckpt.params);
  r.tensor(ckpt.velocity.w1);
  r.tensor(ckpt.velocity.b1);
  r.tensor(ckpt.velocity.w2);
  r.tensor(ckpt.velocity.b2);
  r.tensor(ckpt.velocity.ctx);
  const std::uint64_t echo_len = r.u64();
  ckpt.config_echo = r.blob(static_cast<std::size_t>(echo_len));
  if (!r.exhausted()) throw IoError("trailing bytes after checkpoint payload");
  return ckpt;
}

}  // namespace osmcaa
