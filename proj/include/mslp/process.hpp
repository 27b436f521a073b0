#ifndef MSLP_PROCESS_HPP
#define MSLP_PROCESS_HPP

// Sample paths and the sequential observation pools. Sampling is
// counter-based: path k is a pure function of (seed, k), with per-stage
// substreams keyed by the stage index, so streams replay bit-identically and
// adding stages never perturbs earlier ones. A source serializes as just
// (seed, paths drawn).

#include <cstdint>
#include <vector>

#include "mslp/instance.hpp"

namespace mslp {

std::uint64_t splitmix64(std::uint64_t z);

struct SamplePath {
  int k = 0;             // iteration that drew this path
  std::vector<int> obs;  // support index per stage; obs[0] = -1 (root)
};

struct FiniteSupportSource {
  const MslpInstance* in = nullptr;
  std::uint64_t seed = 0;
  int drawn = 0;  // paths handed out so far

  // path for iteration k >= 1, independent of source state
  SamplePath path_at(int k) const;
  SamplePath next() { return path_at(++drawn); }
};

// Distinct observations seen so far at one stage, in first-seen order, with
// draw counts. total equals the number of records, so count/total is the
// empirical probability p^k.
struct ObservationPool {
  int t = 0;
  int total = 0;
  std::vector<int> source;  // ground-truth support index per distinct entry
  std::vector<int> count;

  int index_of(int source_index) const;  // -1 when unseen
};

// Returns the pool index of the recorded observation (appended when unseen).
int record(ObservationPool& pool, int source_index);

// count/total for one pooled observation; throws on an unknown index.
double frequency(const ObservationPool& pool, int pool_index);

// All empirical probabilities in first-seen order (sums to 1).
std::vector<double> weights(const ObservationPool& pool);

}  // namespace mslp

#endif
