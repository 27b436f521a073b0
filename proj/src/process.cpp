#include "mslp/process.hpp"

#include <stdexcept>

namespace mslp {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

namespace {

// uniform in [0,1) from the stage-t substream at counter k
double unit_draw(std::uint64_t seed, int t, int k) {
  std::uint64_t stream = splitmix64(seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(t));
  std::uint64_t h = splitmix64(stream ^ static_cast<std::uint64_t>(k));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

int inverse_cdf(const std::vector<double>& prob, double u) {
  double acc = 0.0;
  for (std::size_t i = 0; i < prob.size(); ++i) {
    acc += prob[i];
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(prob.size()) - 1;  // guards acc rounding below 1
}

}  // namespace

SamplePath FiniteSupportSource::path_at(int k) const {
  if (in == nullptr) throw std::logic_error("source has no instance");
  if (k < 1) throw std::logic_error("paths are numbered from 1");
  SamplePath p;
  p.k = k;
  p.obs.assign(static_cast<std::size_t>(in->T) + 1, -1);
  for (int t = 1; t <= in->T; ++t)
    p.obs[static_cast<std::size_t>(t)] = inverse_cdf(in->prob[static_cast<std::size_t>(t)], unit_draw(seed, t, k));
  return p;
}

int ObservationPool::index_of(int source_index) const {
  for (std::size_t i = 0; i < source.size(); ++i)
    if (source[i] == source_index) return static_cast<int>(i);
  return -1;
}

int record(ObservationPool& pool, int source_index) {
  if (source_index < 0) throw std::logic_error("negative support index");
  int i = pool.index_of(source_index);
  if (i < 0) {
    i = static_cast<int>(pool.source.size());
    pool.source.push_back(source_index);
    pool.count.push_back(0);
  }
  ++pool.count[static_cast<std::size_t>(i)];
  ++pool.total;
  return i;
}

double frequency(const ObservationPool& pool, int pool_index) {
  if (pool_index < 0 || pool_index >= static_cast<int>(pool.count.size()))
    throw std::logic_error("pool index out of range");
  return static_cast<double>(pool.count[static_cast<std::size_t>(pool_index)]) / static_cast<double>(pool.total);
}

std::vector<double> weights(const ObservationPool& pool) {
  std::vector<double> w(pool.count.size());
  for (std::size_t i = 0; i < w.size(); ++i)
    w[i] = static_cast<double>(pool.count[i]) / static_cast<double>(pool.total);
  return w;
}

}  // namespace mslp
