#pragma once

#include <filesystem>
#include <initializer_list>
#include <random>
#include <string>
#include <vector>

#include "spotar/weights.hpp"

namespace spotar::test {

inline std::filesystem::path data_dir() { return SPOTAR_DATA_DIR; }

struct RunningExample {
  Network net;
  WeightStore store;
};

inline RunningExample running_example() {
  RunningExample ex;
  ex.net = load_network(data_dir() / "running_example" / "network.csv");
  ex.store = load_store(data_dir() / "running_example" / "store.json", ex.net);
  return ex;
}

inline std::vector<EdgeId> edges(const Network& net, std::initializer_list<const char*> names) {
  std::vector<EdgeId> out;
  for (const char* n : names) out.push_back(net.edge_by_name(n));
  return out;
}

inline std::string names(const Network& net, const std::vector<EdgeId>& path) {
  return Path(net, path).to_string(net);
}

inline Histogram random_histogram(std::mt19937_64& rng, std::size_t support, Time lo = 1, Time hi = 30) {
  std::uniform_int_distribution<Time> t(lo, hi);
  std::uniform_real_distribution<double> w(0.05, 1.0);
  std::vector<Histogram::Entry> entries;
  for (std::size_t i = 0; i < support; ++i) entries.emplace_back(t(rng), w(rng));
  return Histogram::from_weights(std::move(entries));
}

inline JointDist random_joint(std::mt19937_64& rng, std::vector<EdgeId> es, std::size_t rows) {
  std::uniform_int_distribution<Time> t(1, 12);
  std::uniform_real_distribution<double> w(0.05, 1.0);
  JointDist::Rows r;
  for (std::size_t i = 0; i < rows; ++i) {
    std::vector<Time> key;
    for (std::size_t k = 0; k < es.size(); ++k) key.push_back(t(rng));
    r[key] += w(rng);
  }
  return JointDist::from_weights(std::move(es), std::move(r));
}

}  // namespace spotar::test
