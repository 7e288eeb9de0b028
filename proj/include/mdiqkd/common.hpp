#pragma once

#include <cstddef>
#include <algorithm>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace mdiqkd {

/// Measurement basis tag carried by observables and yield tables.
enum class Basis { Z, X };

inline const char* to_string(Basis b) { return b == Basis::Z ? "Z" : "X"; }

/// Thrown when a source triple fails the admissibility requirements
/// (strict h-ratio ordering, positive elimination denominators, or the
/// ratio-monotonicity condition checked by check_condition).
class InadmissibleTriple : public std::runtime_error {
public:
  explicit InadmissibleTriple(const std::string& what) : std::runtime_error(what) {}
};

/// Thrown when an error-rate upper bound is requested with a non-positive
/// yield lower bound in the denominator.
class UndefinedBound : public std::runtime_error {
public:
  explicit UndefinedBound(const std::string& what) : std::runtime_error(what) {}
};

/// Dense square table indexed by a photon-number pair (k, l), k, l in [0, n_max].
class PairTable {
public:
  PairTable() : n_max_(0), v_(1, 0.0) {}
  explicit PairTable(int n_max) : n_max_(n_max), v_(size_t(n_max + 1) * size_t(n_max + 1), 0.0) {
    if (n_max < 0) throw std::invalid_argument("PairTable: n_max must be >= 0");
  }

  int n_max() const { return n_max_; }

  double operator()(int k, int l) const { return v_[idx(k, l)]; }
  double& operator()(int k, int l) { return v_[idx(k, l)]; }

  const std::vector<double>& data() const { return v_; }

private:
  size_t idx(int k, int l) const {
    if (k < 0 || l < 0 || k > n_max_ || l > n_max_)
      throw std::out_of_range("PairTable: index out of range");
    return size_t(k) * size_t(n_max_ + 1) + size_t(l);
  }

  int n_max_;
  std::vector<double> v_;
};

/// Runs fn(i) for i in [0, count) across worker threads (0 = hardware
/// concurrency). fn must be safe to call concurrently for distinct i; the
/// static index split keeps every run deterministic per index.
template <typename Fn>
void parallel_for(int count, int threads, Fn&& fn) {
  if (count <= 0) return;
  int workers = threads > 0 ? threads : int(std::thread::hardware_concurrency());
  workers = std::max(1, std::min(workers, count));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(size_t(workers));
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (int i = w; i < count; i += workers) fn(i);
    });
  for (auto& t : pool) t.join();
}

}  // namespace mdiqkd
