#include "dpre/samples.h"

#include <algorithm>
#include <istream>
#include <numeric>
#include <ostream>
#include <string>

#include "dpre/csv.h"
#include "dpre/errors.h"

namespace dpre {

void validate(const SampleConfig& cfg) {
  if (cfg.time_window <= 0) throw ConfigError("samples: time_window must be positive");
  if (!(cfg.distance_radius > 0.0)) throw ConfigError("samples: distance_radius must be positive");
  if (cfg.epoch_length < 1) throw ConfigError("samples: epoch_length must be at least 1");
  if (cfg.retention_epochs < 1) throw ConfigError("samples: retention_epochs must be at least 1");
}

std::vector<AccessSample> extract_samples(std::span<const AccessRecord> records,
                                          std::span<const Node> nodes, const SampleConfig& cfg) {
  validate(cfg);
  for (std::size_t i = 1; i < records.size(); ++i) {
    if (records[i].access_tti < records[i - 1].access_tti) {
      throw DataError("extract_samples: records are not sorted by access_tti");
    }
  }
  std::vector<const Node*> by_record;
  by_record.reserve(records.size());
  for (const auto& r : records) by_record.push_back(&node_by_id(nodes, r.node_id));

  auto tti_less = [](const AccessRecord& r, Tti t) { return r.access_tti < t; };
  std::vector<AccessSample> out;
  out.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const AccessRecord& rec = records[i];
    const Node& label = *by_record[i];
    AccessSample sample{rec.node_id, {}, rec.access_tti};
    auto lo = std::lower_bound(records.begin(), records.end(), rec.access_tti - cfg.time_window,
                               tti_less);
    for (auto it = lo; it != records.end() && it->access_tti <= rec.access_tti + cfg.time_window;
         ++it) {
      if (it->node_id == rec.node_id) continue;
      const Node& x = *by_record[static_cast<std::size_t>(it - records.begin())];
      if (x.type == label.type || distance(x.location, label.location) <= cfg.distance_radius) {
        sample.features.push_back(x.id);
      }
    }
    out.push_back(std::move(sample));
  }
  return out;
}

Corpus::Corpus(int retention_epochs) : retention_epochs_(retention_epochs) {
  if (retention_epochs < 1) throw ConfigError("corpus: retention must be at least one epoch");
}

void Corpus::update(int epoch, std::vector<AccessSample> new_samples) {
  newest_epoch_ = samples_.empty() ? epoch : std::max(newest_epoch_, epoch);
  for (auto& s : new_samples) {
    samples_.push_back(std::move(s));
    epochs_.push_back(epoch);
  }
  const int oldest_kept = newest_epoch_ - retention_epochs_ + 1;
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    if (epochs_[i] >= oldest_kept) order.push_back(i);
  }
  std::stable_sort(order.begin(), order.end(), [this](std::size_t a, std::size_t b) {
    return samples_[a].tti < samples_[b].tti;
  });
  std::vector<AccessSample> kept;
  std::vector<int> kept_epochs;
  kept.reserve(order.size());
  kept_epochs.reserve(order.size());
  for (std::size_t i : order) {
    kept.push_back(std::move(samples_[i]));
    kept_epochs.push_back(epochs_[i]);
  }
  samples_ = std::move(kept);
  epochs_ = std::move(kept_epochs);
}

void write_corpus_csv(std::ostream& out, std::span<const AccessSample> samples) {
  out << "label,tti,feature_ids\n";
  for (const auto& s : samples) {
    out << s.label << ',' << s.tti << ',';
    for (std::size_t i = 0; i < s.features.size(); ++i) {
      if (i) out << ';';
      out << s.features[i];
    }
    out << '\n';
  }
}

std::vector<AccessSample> read_corpus_csv(std::istream& in) {
  std::vector<AccessSample> samples;
  for (const auto& row : csv::read_rows(in, "label,tti,feature_ids")) {
    if (row.size() < 2 || row.size() > 3) throw DataError("corpus CSV: expected 3 columns");
    try {
      AccessSample s;
      s.label = std::stoi(row[0]);
      s.tti = std::stoll(row[1]);
      if (row.size() == 3 && !row[2].empty()) {
        for (const auto& f : csv::split(row[2], ';')) s.features.push_back(std::stoi(f));
      }
      samples.push_back(std::move(s));
    } catch (const std::logic_error&) {
      throw DataError("corpus CSV: malformed number in row starting '" + row[0] + "'");
    }
  }
  return samples;
}

}  // namespace dpre
