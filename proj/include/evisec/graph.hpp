#pragma once

#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "evisec/common.hpp"

namespace evisec {

// One timestep of a dynamic graph. Edges are undirected, stored once with
// src < dst, no self-loops, sorted and unique. Feature matrix has one row
// per node (global index space; absent nodes keep zero rows).
struct GraphSnapshot {
    int timestep = 0;
    int num_nodes = 0;
    std::vector<std::pair<int, int>> edges;
    Mat features;                  // num_nodes x d
    Eigen::VectorXi node_labels;   // size 0 (absent) or num_nodes, -1 = unlabeled
    std::vector<int> edge_labels;  // empty or parallel to edges

    void add_edge(int src, int dst, int label = -1);
    // Sorts, deduplicates, drops self-loops. Call after bulk add_edge.
    void finalize_edges();
    void validate() const;
    std::vector<int> degrees() const;  // without self-loops
};

struct DynamicGraphSequence {
    std::vector<GraphSnapshot> snapshots;
    int feature_dim = 0;
    int num_classes = 0;
    std::vector<std::string> node_ids;  // original ids, index = dense id
    std::string provenance = "id";      // id | sm | fi

    int total_timesteps() const { return static_cast<int>(snapshots.size()); }
    int num_nodes() const { return snapshots.empty() ? 0 : snapshots.front().num_nodes; }
    void validate() const;
};

struct SnapshotWindow {
    int start = 0;
    std::vector<GraphSnapshot> snapshots;

    int length() const { return static_cast<int>(snapshots.size()); }
};

struct EdgeListSchema {
    char delimiter = 0;  // 0 = auto-detect comma/tab
    int src_col = 0;
    int dst_col = 1;
    int time_col = 2;
    int label_col = -1;            // -1 = none
    bool header = false;           // first row is column names
    int default_feature_dim = 8;   // one-hot degree dim when no feature file
};

struct LoadResult {
    DynamicGraphSequence sequence;
    std::vector<std::string> warnings;
};

// Rows are (src, dst, timestep[, label]); node ids are arbitrary tokens and
// get re-indexed densely in first-seen order. Nodes without a feature row
// (or when no feature file is given) get one-hot of min(degree, d-1).
LoadResult load_temporal_edgelist(std::istream& source, const EdgeListSchema& schema,
                                  std::istream* feature_file = nullptr);

// P = D~^{-1/2} (A + I) D~^{-1/2}, symmetric, eigenvalues in (-1, 1].
Mat normalize_propagation(const GraphSnapshot& snap);

SnapshotWindow window(const DynamicGraphSequence& seq, int t, int delta_t);

// On-disk format: directory with manifest.json plus per-snapshot CSVs.
void save_sequence(const DynamicGraphSequence& seq, const std::filesystem::path& dir);
DynamicGraphSequence load_sequence(const std::filesystem::path& dir);

// Hash over snapshot content (edges, features, labels); provenance and
// node-id strings excluded.
std::uint64_t sequence_content_hash(const DynamicGraphSequence& seq);

}  // namespace evisec
