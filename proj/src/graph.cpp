#include "evisec/graph.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

namespace evisec {

namespace {

std::vector<std::string> split_line(const std::string& line, char delim) {
    std::vector<std::string> out;
    std::string tok;
    std::istringstream ss(line);
    while (std::getline(ss, tok, delim)) {
        // trim surrounding whitespace
        size_t b = tok.find_first_not_of(" \r\n");
        size_t e = tok.find_last_not_of(" \r\n");
        out.push_back(b == std::string::npos ? "" : tok.substr(b, e - b + 1));
    }
    return out;
}

bool parse_int(const std::string& s, long& out) {
    if (s.empty()) return false;
    char* end = nullptr;
    out = std::strtol(s.c_str(), &end, 10);
    return end && *end == '\0';
}

bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return end && *end == '\0';
}

}  // namespace

void GraphSnapshot::add_edge(int src, int dst, int label) {
    if (src == dst) return;  // self-loops only appear during normalization
    if (src > dst) std::swap(src, dst);
    edges.emplace_back(src, dst);
    if (label >= 0) {
        edge_labels.resize(edges.size() - 1, -1);
        edge_labels.push_back(label);
    }
}

void GraphSnapshot::finalize_edges() {
    if (edge_labels.empty()) {
        std::sort(edges.begin(), edges.end());
        edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
        return;
    }
    edge_labels.resize(edges.size(), -1);
    std::vector<size_t> order(edges.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return edges[a] < edges[b]; });
    std::vector<std::pair<int, int>> e2;
    std::vector<int> l2;
    for (size_t idx : order) {
        if (!e2.empty() && e2.back() == edges[idx]) continue;  // keep first label
        e2.push_back(edges[idx]);
        l2.push_back(edge_labels[idx]);
    }
    edges = std::move(e2);
    edge_labels = std::move(l2);
}

void GraphSnapshot::validate() const {
    if (num_nodes <= 0) throw ValidationError("snapshot has no nodes");
    if (features.rows() != num_nodes)
        throw ValidationError("feature row count " + std::to_string(features.rows()) +
                              " != num_nodes " + std::to_string(num_nodes));
    for (auto [s, d] : edges) {
        if (s == d) throw ValidationError("explicit self-loop stored");
        if (s < 0 || d < 0 || s >= num_nodes || d >= num_nodes)
            throw ValidationError("edge endpoint out of range");
    }
    if (!std::is_sorted(edges.begin(), edges.end()))
        throw ValidationError("edges not sorted");
    if (std::adjacent_find(edges.begin(), edges.end()) != edges.end())
        throw ValidationError("duplicate edge");
    if (node_labels.size() != 0 && node_labels.size() != num_nodes)
        throw ValidationError("node label count mismatch");
    if (!edge_labels.empty() && edge_labels.size() != edges.size())
        throw ValidationError("edge label count mismatch");
}

std::vector<int> GraphSnapshot::degrees() const {
    std::vector<int> deg(num_nodes, 0);
    for (auto [s, d] : edges) {
        ++deg[s];
        ++deg[d];
    }
    return deg;
}

void DynamicGraphSequence::validate() const {
    if (snapshots.empty()) throw ValidationError("empty sequence");
    int prev_t = -1;
    for (const auto& snap : snapshots) {
        snap.validate();
        if (snap.timestep <= prev_t) throw ValidationError("timesteps not strictly increasing");
        prev_t = snap.timestep;
        if (snap.features.cols() != feature_dim)
            throw ValidationError("feature dimension varies across snapshots");
    }
}

LoadResult load_temporal_edgelist(std::istream& source, const EdgeListSchema& schema,
                                  std::istream* feature_file) {
    LoadResult result;
    struct Row {
        int src, dst;
        long t;
        int label;
    };
    std::vector<Row> rows;
    std::map<std::string, int> node_index;
    auto intern = [&](const std::string& id) {
        auto [it, inserted] = node_index.emplace(id, static_cast<int>(node_index.size()));
        if (inserted) result.sequence.node_ids.push_back(id);
        return it->second;
    };

    EdgeListSchema sch = schema;
    std::string line;
    long lineno = 0;
    bool first_data = true;
    int max_label = -1;
    while (std::getline(source, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        if (sch.delimiter == 0) sch.delimiter = line.find('\t') != std::string::npos ? '\t' : ',';
        auto toks = split_line(line, sch.delimiter);
        if (sch.header && first_data) {
            first_data = false;
            for (int c = 0; c < static_cast<int>(toks.size()); ++c) {
                const std::string& name = toks[c];
                if (name == "src" || name == "source") sch.src_col = c;
                else if (name == "dst" || name == "target") sch.dst_col = c;
                else if (name == "t" || name == "time" || name == "timestep") sch.time_col = c;
                else if (name == "label") sch.label_col = c;
            }
            continue;
        }
        first_data = false;
        int needed = std::max({sch.src_col, sch.dst_col, sch.time_col, sch.label_col});
        if (static_cast<int>(toks.size()) <= needed)
            throw ParseError("too few columns", lineno);
        long t;
        if (!parse_int(toks[sch.time_col], t) || t < 0)
            throw ParseError("bad timestep '" + toks[sch.time_col] + "'", lineno);
        int label = -1;
        if (sch.label_col >= 0) {
            long lv;
            if (!parse_int(toks[sch.label_col], lv) || lv < 0)
                throw ParseError("bad label '" + toks[sch.label_col] + "'", lineno);
            label = static_cast<int>(lv);
            max_label = std::max(max_label, label);
        }
        rows.push_back({intern(toks[sch.src_col]), intern(toks[sch.dst_col]), t, label});
    }
    if (rows.empty()) throw ValidationError("EmptyDataset: no edge rows in source");

    // bucket by timestep, compacting gaps
    std::map<long, std::vector<Row>> buckets;
    for (const auto& r : rows) buckets[r.t].push_back(r);
    {
        long expect = buckets.begin()->first;
        bool contiguous = buckets.begin()->first == 0;
        for (auto& [t, _] : buckets) contiguous = contiguous && (t == expect++);
        if (!contiguous)
            result.warnings.push_back("non-contiguous timesteps compacted to 0.." +
                                      std::to_string(buckets.size() - 1));
    }

    const int n = static_cast<int>(node_index.size());

    // optional static feature table keyed by original node id
    Mat feat_table;
    std::vector<char> has_feat(n, 0);
    int d = sch.default_feature_dim;
    if (feature_file) {
        long fline = 0;
        bool dim_known = false;
        while (std::getline(*feature_file, line)) {
            ++fline;
            if (line.empty()) continue;
            char fdelim = line.find('\t') != std::string::npos ? '\t' : ',';
            auto toks = split_line(line, fdelim);
            if (toks.size() < 2) throw ParseError("feature row needs node_id and values", fline);
            if (!dim_known) {
                d = static_cast<int>(toks.size()) - 1;
                feat_table = Mat::Zero(n, d);
                dim_known = true;
            }
            if (static_cast<int>(toks.size()) - 1 != d)
                throw ParseError("feature row dimension mismatch", fline);
            auto it = node_index.find(toks[0]);
            if (it == node_index.end()) continue;  // feature for a node never seen in edges
            for (int j = 0; j < d; ++j) {
                double v;
                if (!parse_double(toks[j + 1], v)) throw ParseError("bad feature value", fline);
                feat_table(it->second, j) = v;
            }
            has_feat[it->second] = 1;
        }
    }

    int compact_t = 0;
    for (auto& [orig_t, bucket] : buckets) {
        GraphSnapshot snap;
        snap.timestep = compact_t++;
        snap.num_nodes = n;
        bool has_labels = sch.label_col >= 0;
        for (const auto& r : bucket) snap.add_edge(r.src, r.dst, has_labels ? r.label : -1);
        snap.finalize_edges();
        snap.features = Mat::Zero(n, d);
        auto deg = snap.degrees();
        std::vector<char> present(n, 0);
        for (auto [s, dd] : snap.edges) present[s] = present[dd] = 1;
        for (int i = 0; i < n; ++i) {
            if (!present[i]) continue;  // absent nodes keep zero rows
            if (feature_file && has_feat[i]) snap.features.row(i) = feat_table.row(i);
            else snap.features(i, std::min(deg[i], d - 1)) = 1.0;
        }
        result.sequence.snapshots.push_back(std::move(snap));
    }
    result.sequence.feature_dim = d;
    result.sequence.num_classes = max_label >= 0 ? max_label + 1 : 0;
    result.sequence.validate();
    return result;
}

Mat normalize_propagation(const GraphSnapshot& snap) {
    const int n = snap.num_nodes;
    Mat a_tilde = Mat::Identity(n, n);
    for (auto [s, d] : snap.edges) {
        a_tilde(s, d) = 1.0;
        a_tilde(d, s) = 1.0;
    }
    Vec dinv_sqrt(n);
    for (int i = 0; i < n; ++i) dinv_sqrt(i) = 1.0 / std::sqrt(a_tilde.row(i).sum());
    return dinv_sqrt.asDiagonal() * a_tilde * dinv_sqrt.asDiagonal();
}

SnapshotWindow window(const DynamicGraphSequence& seq, int t, int delta_t) {
    if (t < 0 || delta_t < 1) throw ValidationError("window: t >= 0 and delta_t >= 1 required");
    if (t + delta_t > seq.total_timesteps())
        throw ValidationError("window OutOfRange: t + delta_t = " + std::to_string(t + delta_t) +
                              " exceeds T = " + std::to_string(seq.total_timesteps()));
    SnapshotWindow w;
    w.start = t;
    w.snapshots.assign(seq.snapshots.begin() + t, seq.snapshots.begin() + t + delta_t);
    return w;
}

std::uint64_t sequence_content_hash(const DynamicGraphSequence& seq) {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&](std::uint64_t v) {
        h ^= v;
        h *= 1099511628211ull;
    };
    auto mix_double = [&](double d) {
        std::uint64_t bits;
        std::memcpy(&bits, &d, sizeof(bits));
        mix(bits);
    };
    mix(static_cast<std::uint64_t>(seq.feature_dim));
    mix(static_cast<std::uint64_t>(seq.num_classes));
    for (const auto& snap : seq.snapshots) {
        mix(static_cast<std::uint64_t>(snap.timestep));
        mix(static_cast<std::uint64_t>(snap.num_nodes));
        for (auto [s, d] : snap.edges) {
            mix(static_cast<std::uint64_t>(s));
            mix(static_cast<std::uint64_t>(d));
        }
        for (Eigen::Index i = 0; i < snap.features.rows(); ++i)
            for (Eigen::Index j = 0; j < snap.features.cols(); ++j)
                mix_double(snap.features(i, j));
        for (Eigen::Index i = 0; i < snap.node_labels.size(); ++i)
            mix(static_cast<std::uint64_t>(snap.node_labels(i) + 1));
        for (int l : snap.edge_labels) mix(static_cast<std::uint64_t>(l + 1));
    }
    return h;
}

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

void write_matrix_csv(const fs::path& path, const Mat& m) {
    std::ofstream out(path);
    out << std::hexfloat;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << m(i, j);
        out << "\n";
    }
}

Mat read_matrix_csv(const fs::path& path, Eigen::Index rows, Eigen::Index cols) {
    std::ifstream in(path);
    if (!in) throw ValidationError("missing file " + path.string());
    Mat m(rows, cols);
    std::string line;
    for (Eigen::Index i = 0; i < rows; ++i) {
        if (!std::getline(in, line)) throw ValidationError("truncated matrix in " + path.string());
        auto toks = split_line(line, ',');
        if (static_cast<Eigen::Index>(toks.size()) != cols)
            throw ValidationError("bad matrix row in " + path.string());
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = std::strtod(toks[j].c_str(), nullptr);
    }
    return m;
}

}  // namespace

void save_sequence(const DynamicGraphSequence& seq, const std::filesystem::path& dir) {
    seq.validate();
    fs::create_directories(dir);
    json manifest;
    manifest["schema_version"] = 1;
    manifest["format"] = "evisec-sequence";
    manifest["total_timesteps"] = seq.total_timesteps();
    manifest["num_nodes"] = seq.num_nodes();
    manifest["feature_dim"] = seq.feature_dim;
    manifest["num_classes"] = seq.num_classes;
    manifest["provenance"] = seq.provenance;
    manifest["node_ids"] = seq.node_ids;
    std::vector<json> snaps;
    for (const auto& snap : seq.snapshots) {
        json s;
        s["timestep"] = snap.timestep;
        s["num_edges"] = snap.edges.size();
        s["has_node_labels"] = snap.node_labels.size() != 0;
        s["has_edge_labels"] = !snap.edge_labels.empty();
        snaps.push_back(s);
        std::string tag = std::to_string(snap.timestep);
        std::ofstream ef(dir / ("edges_" + tag + ".csv"));
        for (size_t i = 0; i < snap.edges.size(); ++i) {
            ef << snap.edges[i].first << "," << snap.edges[i].second;
            if (!snap.edge_labels.empty()) ef << "," << snap.edge_labels[i];
            ef << "\n";
        }
        write_matrix_csv(dir / ("features_" + tag + ".csv"), snap.features);
        if (snap.node_labels.size() != 0) {
            std::ofstream lf(dir / ("labels_" + tag + ".csv"));
            for (Eigen::Index i = 0; i < snap.node_labels.size(); ++i)
                lf << snap.node_labels(i) << "\n";
        }
    }
    manifest["snapshots"] = snaps;
    std::ofstream mf(dir / "manifest.json");
    mf << manifest.dump(2) << "\n";
}

DynamicGraphSequence load_sequence(const std::filesystem::path& dir) {
    std::ifstream mf(dir / "manifest.json");
    if (!mf) throw ValidationError("no manifest.json in " + dir.string());
    json manifest = json::parse(mf);
    if (manifest.value("schema_version", 0) != 1)
        throw ValidationError("unsupported sequence schema_version");
    DynamicGraphSequence seq;
    seq.feature_dim = manifest["feature_dim"];
    seq.num_classes = manifest["num_classes"];
    seq.provenance = manifest.value("provenance", "id");
    seq.node_ids = manifest.value("node_ids", std::vector<std::string>{});
    const int n = manifest["num_nodes"];
    for (const auto& s : manifest["snapshots"]) {
        GraphSnapshot snap;
        snap.timestep = s["timestep"];
        snap.num_nodes = n;
        std::string tag = std::to_string(snap.timestep);
        std::ifstream ef(dir / ("edges_" + tag + ".csv"));
        if (!ef) throw ValidationError("missing edges file for timestep " + tag);
        std::string line;
        bool has_edge_labels = s.value("has_edge_labels", false);
        while (std::getline(ef, line)) {
            if (line.empty()) continue;
            auto toks = split_line(line, ',');
            int src = std::stoi(toks[0]), dst = std::stoi(toks[1]);
            snap.add_edge(src, dst, has_edge_labels ? std::stoi(toks[2]) : -1);
        }
        snap.finalize_edges();
        snap.features = read_matrix_csv(dir / ("features_" + tag + ".csv"), n, seq.feature_dim);
        if (s.value("has_node_labels", false)) {
            std::ifstream lf(dir / ("labels_" + tag + ".csv"));
            snap.node_labels.resize(n);
            for (int i = 0; i < n; ++i) {
                std::getline(lf, line);
                snap.node_labels(i) = std::stoi(line);
            }
        }
        seq.snapshots.push_back(std::move(snap));
    }
    seq.validate();
    return seq;
}

}  // namespace evisec
