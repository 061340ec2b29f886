#include "mfnet/prm.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <tuple>

namespace mfnet {

PrmStream::PrmStream(StreamId id, std::uint64_t seed, double horizon, std::vector<double> rho,
                     std::vector<double> ceiling)
    : id_(id),
      seed_(seed),
      horizon_(horizon),
      rho_(std::move(rho)),
      ceiling_(std::move(ceiling)),
      cache_(std::make_shared<Cache>()) {
  if (rho_.size() != ceiling_.size()) throw std::invalid_argument("PrmStream: rho and ceiling sizes differ");
}

const std::vector<PrmEvent>& PrmStream::events() const {
  std::call_once(cache_->once, [this] {
    auto& out = cache_->events;
    for (std::uint32_t y = 0; y < rho_.size(); ++y) {
      const MarkProcess proc(seed_, id_, y, rho_[y] * ceiling_[y], ceiling_[y]);
      double s = proc.first_time();
      for (std::uint32_t k = 0; s <= horizon_; ++k) {
        const auto st = proc.step(k, s);
        out.push_back({s, y, st.z});
        s = st.next_s;
      }
    }
    std::sort(out.begin(), out.end(), [](const PrmEvent& a, const PrmEvent& b) {
      return std::tie(a.s, a.mark, a.z) < std::tie(b.s, b.mark, b.z);
    });
  });
  return cache_->events;
}

std::vector<PrmEvent> PrmStream::events_between(double t0, double t1) const {
  if (!(t0 >= 0.0 && t0 <= t1 && t1 <= horizon_))
    throw std::out_of_range("events_between: need 0 <= t0 <= t1 <= T");
  const auto& all = events();
  auto lo = std::upper_bound(all.begin(), all.end(), t0, [](double t, const PrmEvent& e) { return t < e.s; });
  auto hi = std::upper_bound(lo, all.end(), t1, [](double t, const PrmEvent& e) { return t < e.s; });
  return {lo, hi};
}

bool thin(const PrmEvent& event, double rate, double ceiling) {
  if (rate < 0.0 || rate > ceiling * (1.0 + 1e-12) + 1e-300)
    throw std::domain_error("thin: rate " + std::to_string(rate) + " outside [0, " + std::to_string(ceiling) + "]");
  return event.z <= rate;
}

PrmStream StreamFamily::node(std::uint32_t i) const {
  return PrmStream(StreamId::node(i), seed, horizon, rho, node_ceiling);
}

PrmStream StreamFamily::edge(std::uint32_t i, std::uint32_t j) const {
  return PrmStream(StreamId::edge(i, j), seed, horizon, rho, edge_ceiling);
}

MarkProcess StreamFamily::node_process(std::uint32_t i, std::uint32_t mark) const {
  return MarkProcess(seed, StreamId::node(i), mark, rho[mark] * node_ceiling[mark], node_ceiling[mark]);
}

MarkProcess StreamFamily::edge_process(std::uint32_t i, std::uint32_t j, std::uint32_t mark) const {
  return MarkProcess(seed, StreamId::edge(i, j), mark, rho[mark] * edge_ceiling[mark], edge_ceiling[mark]);
}

double StreamFamily::expected_candidates(std::size_t n) const {
  double node_rate = 0.0, edge_rate = 0.0;
  for (std::size_t y = 0; y < rho.size(); ++y) {
    node_rate += rho[y] * node_ceiling[y];
    edge_rate += rho[y] * edge_ceiling[y];
  }
  const double nn = static_cast<double>(n);
  return horizon * (nn * node_rate + nn * nn * edge_rate);
}

StreamFamily make_stream_family(const ModelSpec& spec, std::uint64_t seed, double beta_max) {
  if (beta_max < 0.0) throw std::invalid_argument("make_stream_family: beta_max must be >= 0");
  StreamFamily f;
  f.seed = seed;
  f.horizon = spec.horizon;
  f.rho = spec.rho;
  f.beta_max = beta_max;
  for (std::size_t y = 0; y < spec.num_marks(); ++y) {
    f.node_ceiling.push_back(spec.node_rate_max(y));
    f.edge_ceiling.push_back(beta_max * spec.edge_rate_max(y));
  }
  return f;
}

double keyed_uniform(std::uint64_t seed, StreamKind kind, std::uint32_t i, std::uint32_t j) {
  const auto u = uniform_pair({0u, static_cast<std::uint32_t>(kind) << 24, i, j}, philox_key(seed));
  return u.open - 0x1.0p-54;
}

namespace {

template <typename T>
void put_le(std::ofstream& out, T value) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

}  // namespace

void write_stream_binary(const PrmStream& stream, const ModelSpec& spec, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path);
  out.write("MFPRM001", 8);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(stream.id().kind));
  put_le<std::uint32_t>(out, stream.id().i);
  put_le<std::uint32_t>(out, stream.id().j);
  put_le<std::uint64_t>(out, stream.seed());
  put_le<double>(out, stream.horizon());
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(stream.ceiling().size()));
  for (std::size_t y = 0; y < stream.ceiling().size(); ++y) {
    put_le<std::int32_t>(out, spec.spaces.marks.value(y));
    put_le<double>(out, stream.ceiling()[y]);
  }
  const auto& events = stream.events();
  put_le<std::uint64_t>(out, events.size());
  for (const auto& e : events) {
    put_le<double>(out, e.s);
    put_le<std::int32_t>(out, spec.spaces.marks.value(e.mark));
    put_le<double>(out, e.z);
  }
}

}  // namespace mfnet
