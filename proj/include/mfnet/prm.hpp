#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "mfnet/model.hpp"
#include "mfnet/philox.hpp"

namespace mfnet {

enum class StreamKind : std::uint32_t { Node = 0, Edge = 1, NodeInit = 2, EdgeInit = 3 };

/// Identifies one Poisson random measure. Indices are 1-based; edge pairs are ordered.
struct StreamId {
  StreamKind kind = StreamKind::Node;
  std::uint32_t i = 1;
  std::uint32_t j = 0;

  static StreamId node(std::uint32_t i) { return {StreamKind::Node, i, 0}; }
  static StreamId edge(std::uint32_t i, std::uint32_t j) { return {StreamKind::Edge, i, j}; }
  friend bool operator==(const StreamId&, const StreamId&) = default;
};

/// One atom (s, y, z) of a PRM; `mark` is the index into the mark set.
struct PrmEvent {
  double s;
  std::uint32_t mark;
  double z;
  friend bool operator==(const PrmEvent&, const PrmEvent&) = default;
};

// Sequential generator of the atoms carrying one mark in one stream.
// Atom k is a pure function of (seed, id, mark, k): counter word 0 holds the
// ordinal, so any atom can be regenerated without replaying the stream.
class MarkProcess {
 public:
  MarkProcess(std::uint64_t seed, StreamId id, std::uint32_t mark, double rate, double ceiling)
      : key_(philox_key(seed)),
        word1_((static_cast<std::uint32_t>(id.kind) << 24) | mark),
        i_(id.i),
        j_(id.j),
        rate_(rate),
        ceiling_(ceiling) {}

  /// Time of atom 0 (+inf when the intensity is zero).
  double first_time() const {
    if (!(rate_ > 0.0)) return kNever;
    return -std::log(uniform_pair({0u, word1_, i_, j_}, key_).open) / rate_;
  }

  struct Step {
    double z;       // mark of atom k
    double next_s;  // time of atom k+1
  };
  /// Uniform mark of atom k and the arrival time of atom k+1, given s_k.
  Step step(std::uint32_t k, double s_k) const {
    const auto u = uniform_pair({k + 1u, word1_, i_, j_}, key_);
    return {u.closed * ceiling_, s_k - std::log(u.open) / rate_};
  }

  double rate() const { return rate_; }
  double ceiling() const { return ceiling_; }

  static constexpr double kNever = 1e300;

 private:
  Philox4x32::Key key_;
  std::uint32_t word1_, i_, j_;
  double rate_, ceiling_;
};

// Seeded PRM on [0,T] x Y x [0, ceiling_y] with intensity ds x rho(dy) x dz.
// Copies share the materialized atoms; materialization is thread-safe.
class PrmStream {
 public:
  PrmStream(StreamId id, std::uint64_t seed, double horizon, std::vector<double> rho, std::vector<double> ceiling);

  const StreamId& id() const { return id_; }
  std::uint64_t seed() const { return seed_; }
  double horizon() const { return horizon_; }
  const std::vector<double>& rho() const { return rho_; }
  const std::vector<double>& ceiling() const { return ceiling_; }

  /// All atoms on (0, T], sorted by (s, mark, z).
  const std::vector<PrmEvent>& events() const;
  /// Atoms with s in (t0, t1]. Throws std::out_of_range unless 0 <= t0 <= t1 <= T.
  std::vector<PrmEvent> events_between(double t0, double t1) const;

 private:
  struct Cache {
    std::once_flag once;
    std::vector<PrmEvent> events;
  };
  StreamId id_;
  std::uint64_t seed_;
  double horizon_;
  std::vector<double> rho_;
  std::vector<double> ceiling_;
  std::shared_ptr<Cache> cache_;
};

/// Thinning test: accept iff z <= rate. Throws std::domain_error when rate lies outside [0, ceiling].
bool thin(const PrmEvent& event, double rate, double ceiling);

/// Seeds and ceilings shared by every stream of one experiment family.
struct StreamFamily {
  std::uint64_t seed = 0;
  double horizon = 1.0;
  std::vector<double> rho;
  std::vector<double> node_ceiling;  // max_y gamma(y, .)
  std::vector<double> edge_ceiling;  // beta_max * max Gamma~(y, .)
  double beta_max = 0.0;

  PrmStream node(std::uint32_t i) const;
  PrmStream edge(std::uint32_t i, std::uint32_t j) const;
  MarkProcess node_process(std::uint32_t i, std::uint32_t mark) const;
  MarkProcess edge_process(std::uint32_t i, std::uint32_t j, std::uint32_t mark) const;

  /// Expected candidate count for an n-node system, sum over streams of rho(y) ceiling_y T.
  double expected_candidates(std::size_t n) const;
};

StreamFamily make_stream_family(const ModelSpec& spec, std::uint64_t seed, double beta_max);

/// Uniform in (0,1) keyed by (seed, kind, i, j); used for initial-condition draws.
double keyed_uniform(std::uint64_t seed, StreamKind kind, std::uint32_t i, std::uint32_t j);

/// Debug dump: header (id, seed, T, ceilings) then packed little-endian (s:f64, y:i32, z:f64) records.
void write_stream_binary(const PrmStream& stream, const ModelSpec& spec, const std::string& path);

}  // namespace mfnet
