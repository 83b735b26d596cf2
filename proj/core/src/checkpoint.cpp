#include "helm/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "helm/errors.hpp"

namespace helm {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes little-endian");

namespace {

constexpr std::array<char, 8> kMagic{'H', 'E', 'L', 'M', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kMaxDim = 1u << 20;

template <typename T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw InvalidParameter("checkpoint truncated");
  return value;
}

void put_matrix(std::ostream& out, const Eigen::MatrixXd& m) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(m.rows()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(m.cols()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) put<double>(out, m(r, c));
  }
}

Eigen::MatrixXd get_matrix(std::istream& in) {
  const auto rows = get<std::uint32_t>(in);
  const auto cols = get<std::uint32_t>(in);
  if (rows > kMaxDim || cols > kMaxDim) throw InvalidParameter("checkpoint tensor too large");
  Eigen::MatrixXd m(rows, cols);
  for (std::uint32_t r = 0; r < rows; ++r) {
    for (std::uint32_t c = 0; c < cols; ++c) m(r, c) = get<double>(in);
  }
  return m;
}

void put_net(std::ostream& out, const MlpParams& p) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(p.layers.size()));
  for (const auto& l : p.layers) {
    put_matrix(out, l.weight);
    put_matrix(out, l.bias);
  }
  put_matrix(out, p.log_std);
}

MlpParams get_net(std::istream& in) {
  const auto n = get<std::uint32_t>(in);
  if (n > 64) throw InvalidParameter("checkpoint has an implausible layer count");
  MlpParams p;
  for (std::uint32_t i = 0; i < n; ++i) {
    DenseLayer l;
    l.weight = get_matrix(in);
    const Eigen::MatrixXd b = get_matrix(in);
    if (b.cols() != 1) throw InvalidParameter("checkpoint bias is not a column vector");
    l.bias = b.col(0);
    p.layers.push_back(std::move(l));
  }
  const Eigen::MatrixXd ls = get_matrix(in);
  if (ls.size() > 0) {
    if (ls.cols() != 1) throw InvalidParameter("checkpoint log_std is not a column vector");
    p.log_std = ls.col(0);
  }
  return p;
}

void put_adam(std::ostream& out, const AdamState& a) {
  put<std::int64_t>(out, a.step);
  put<double>(out, a.beta1);
  put<double>(out, a.beta2);
  put<double>(out, a.epsilon);
  put_net(out, a.first_moment);
  put_net(out, a.second_moment);
}

AdamState get_adam(std::istream& in) {
  AdamState a;
  a.step = get<std::int64_t>(in);
  a.beta1 = get<double>(in);
  a.beta2 = get<double>(in);
  a.epsilon = get<double>(in);
  a.first_moment = get_net(in);
  a.second_moment = get_net(in);
  return a;
}

}  // namespace

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
  out.write(kMagic.data(), kMagic.size());
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint32_t>(out, ckpt.iteration);
  put<std::int64_t>(out, ckpt.global_step);
  put<std::uint64_t>(out, ckpt.rng_state.size());
  out.write(ckpt.rng_state.data(), static_cast<std::streamsize>(ckpt.rng_state.size()));
  put_net(out, ckpt.actor);
  put_net(out, ckpt.critic);
  put_adam(out, ckpt.actor_adam);
  put_adam(out, ckpt.critic_adam);
}

Checkpoint read_checkpoint(std::istream& in) {
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw InvalidParameter("not a helm checkpoint");
  const auto version = get<std::uint32_t>(in);
  if (version != kCheckpointVersion) {
    throw InvalidParameter("unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint ckpt;
  ckpt.iteration = get<std::uint32_t>(in);
  ckpt.global_step = get<std::int64_t>(in);
  const auto len = get<std::uint64_t>(in);
  if (len > (1u << 20)) throw InvalidParameter("checkpoint rng state too large");
  ckpt.rng_state.resize(len);
  in.read(ckpt.rng_state.data(), static_cast<std::streamsize>(len));
  if (!in) throw InvalidParameter("checkpoint truncated");
  ckpt.actor = get_net(in);
  ckpt.critic = get_net(in);
  ckpt.actor_adam = get_adam(in);
  ckpt.critic_adam = get_adam(in);
  ckpt.actor.validate();
  ckpt.critic.validate();
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidParameter("cannot open checkpoint for writing: " + path.string());
  write_checkpoint(out, ckpt);
  out.flush();
  if (!out) throw InvalidParameter("failed writing checkpoint: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidParameter("cannot open checkpoint: " + path.string());
  return read_checkpoint(in);
}

}  // namespace helm
