#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "dpre/topology.h"

namespace dpre {

enum class AccessPath { kPreAllocated, kConventional };

struct AccessRecord {
  NodeId node_id = 0;
  Tti access_tti = 0;  // S_x
  AccessPath path = AccessPath::kConventional;
  Tti latency = 0;      // TTIs from trigger to successful access
  Tti trigger_tti = 0;
};

// One labeled training example: `label` accessed at `tti`, `features` are the
// nodes that satisfied the window/type/distance predicate around it.
struct AccessSample {
  NodeId label = 0;
  std::vector<NodeId> features;
  Tti tti = 0;

  bool operator==(const AccessSample&) const = default;
};

struct SampleConfig {
  Tti time_window = 25;         // R_t
  double distance_radius = 0.5; // R_r, meters
  int epoch_length = 100;       // trials between retrainings
  int retention_epochs = 4;
};

void validate(const SampleConfig& cfg);

// `records` must be sorted by access_tti. Each access of a qualifying node
// inside [S_y - R_t, S_y + R_t] contributes one feature occurrence.
std::vector<AccessSample> extract_samples(std::span<const AccessRecord> records,
                                          std::span<const Node> nodes, const SampleConfig& cfg);

// Rolling training corpus with epoch-based eviction.
class Corpus {
 public:
  explicit Corpus(int retention_epochs = 4);

  // Appends samples tagged with `epoch` and evicts everything older than the
  // newest `retention_epochs` epochs. Samples stay ordered by tti.
  void update(int epoch, std::vector<AccessSample> new_samples);

  const std::vector<AccessSample>& samples() const { return samples_; }
  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }
  int retention_epochs() const { return retention_epochs_; }

 private:
  int retention_epochs_;
  int newest_epoch_ = 0;
  std::vector<AccessSample> samples_;
  std::vector<int> epochs_;
};

void write_corpus_csv(std::ostream& out, std::span<const AccessSample> samples);
std::vector<AccessSample> read_corpus_csv(std::istream& in);

}  // namespace dpre
