#include "gnnsde/landmark.hpp"

#include <algorithm>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <string>

#include "gnnsde/error.hpp"
#include "gnnsde/sssp.hpp"
#include "text_util.hpp"

namespace gnnsde {

LandmarkStrategy parse_landmark_strategy(std::string_view name) {
  if (name == "random") return LandmarkStrategy::Random;
  if (name == "farthest") return LandmarkStrategy::Farthest;
  throw ValidationError("unknown landmark strategy '" + std::string(name) + "'");
}

std::size_t landmark_count_rule(std::size_t node_count) {
  const double fraction = node_count < 10000 ? 0.02 : 0.005;
  const auto count = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(node_count)));
  return std::clamp<std::size_t>(count, 1, std::max<std::size_t>(node_count, 1));
}

std::vector<NodeId> select_landmarks(const Graph& graph, std::size_t count, LandmarkStrategy strategy,
                                     std::uint64_t seed, std::optional<NodeId> start) {
  const auto n = graph.node_count();
  if (count < 1 || count > n) {
    throw ValidationError("landmark count " + std::to_string(count) + " outside [1, " + std::to_string(n) + "]");
  }
  std::mt19937_64 rng(seed);
  if (strategy == LandmarkStrategy::Random) {
    std::vector<NodeId> pool(n);
    std::iota(pool.begin(), pool.end(), 0u);
    for (std::size_t i = 0; i < count; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, n - 1);
      std::swap(pool[i], pool[pick(rng)]);
    }
    pool.resize(count);
    return pool;
  }

  NodeId first = 0;
  if (start) {
    if (*start >= n) throw ValidationError("landmark start node out of range");
    first = *start;
  } else {
    first = std::uniform_int_distribution<NodeId>(0, static_cast<NodeId>(n - 1))(rng);
  }
  std::vector<NodeId> chosen{first};
  std::vector<bool> is_landmark(n, false);
  is_landmark[first] = true;
  std::vector<double> nearest = dijkstra(graph, first).dist;
  while (chosen.size() < count) {
    NodeId best = kNoNode;
    for (NodeId v = 0; v < n; ++v) {
      if (is_landmark[v]) continue;
      if (best == kNoNode || nearest[v] > nearest[best]) best = v;
    }
    chosen.push_back(best);
    is_landmark[best] = true;
    const auto next = dijkstra(graph, best).dist;
    for (NodeId v = 0; v < n; ++v) nearest[v] = std::min(nearest[v], next[v]);
  }
  return chosen;
}

LandmarkIndex LandmarkIndex::build(const Graph& graph, std::vector<NodeId> landmarks) {
  if (landmarks.empty()) throw ValidationError("landmark index needs at least one landmark");
  LandmarkIndex index;
  index.node_count_ = graph.node_count();
  for (auto l : landmarks) {
    auto forward = dijkstra(graph, l, Direction::Forward);
    auto backward = dijkstra(graph, l, Direction::Reverse);
    index.dist_from_.push_back(std::move(forward.dist));
    index.pred_from_.push_back(std::move(forward.pred));
    index.dist_to_.push_back(std::move(backward.dist));
    index.pred_to_.push_back(std::move(backward.pred));
  }
  index.landmarks_ = std::move(landmarks);
  return index;
}

double LandmarkIndex::estimate(NodeId s, NodeId t) const {
  if (s >= node_count_ || t >= node_count_) throw ValidationError("landmark query node out of range");
  double best = kInf;
  for (std::size_t i = 0; i < landmarks_.size(); ++i) best = std::min(best, dist_to_[i][s] + dist_from_[i][t]);
  return best;
}

std::vector<double> LandmarkIndex::estimate_all(NodeId s) const {
  if (s >= node_count_) throw ValidationError("landmark query node out of range");
  std::vector<double> out(node_count_, kInf);
  for (std::size_t i = 0; i < landmarks_.size(); ++i) {
    const double leg = dist_to_[i][s];
    if (leg == kInf) continue;
    const auto& from = dist_from_[i];
    for (std::size_t t = 0; t < node_count_; ++t) out[t] = std::min(out[t], leg + from[t]);
  }
  return out;
}

void LandmarkIndex::write_csv(const Graph& graph, std::ostream& out) const {
  if (graph.node_count() != node_count_) throw ValidationError("landmark index does not match graph");
  const Graph reverse = graph.reversed();
  out << kSsspCsvHeader << '\n';
  for (std::size_t i = 0; i < landmarks_.size(); ++i) {
    const auto l = landmarks_[i];
    out << "# landmark " << l << " from\n";
    write_sssp_csv_rows(out, SsspResult{l, dist_from_[i], pred_from_[i]}, bfs_hops(graph, l));
    out << "# landmark " << l << " to\n";
    write_sssp_csv_rows(out, SsspResult{l, dist_to_[i], pred_to_[i]}, bfs_hops(reverse, l));
  }
}

LandmarkIndex LandmarkIndex::read_csv(std::istream& in) {
  LandmarkIndex index;
  std::string line;
  std::size_t line_no = 0;
  std::vector<double>* dist = nullptr;
  std::vector<NodeId>* pred = nullptr;
  NodeId block_source = kNoNode;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      const auto tokens = detail::split_ws(line);
      if (tokens.size() != 4 || tokens[1] != "landmark" || (tokens[3] != "from" && tokens[3] != "to")) {
        throw ParseError(line_no, "expected '# landmark <id> from|to'");
      }
      block_source = detail::parse_int<NodeId>(tokens[2], line_no, "landmark id");
      if (tokens[3] == "from") {
        index.landmarks_.push_back(block_source);
        index.dist_from_.emplace_back();
        index.pred_from_.emplace_back();
        dist = &index.dist_from_.back();
        pred = &index.pred_from_.back();
      } else {
        if (index.landmarks_.empty() || index.landmarks_.back() != block_source) {
          throw ParseError(line_no, "'to' block must follow the 'from' block of the same landmark");
        }
        index.dist_to_.emplace_back();
        index.pred_to_.emplace_back();
        dist = &index.dist_to_.back();
        pred = &index.pred_to_.back();
      }
      continue;
    }
    if (!header_seen) {
      if (line != kSsspCsvHeader) throw ParseError(line_no, "expected header '" + std::string(kSsspCsvHeader) + "'");
      header_seen = true;
      continue;
    }
    if (dist == nullptr) throw ParseError(line_no, "row outside a landmark block");
    std::vector<std::string_view> fields;
    std::string_view rest(line);
    for (std::size_t pos; (pos = rest.find(',')) != std::string_view::npos; rest.remove_prefix(pos + 1)) {
      fields.push_back(rest.substr(0, pos));
    }
    fields.push_back(rest);
    if (fields.size() != 5) throw ParseError(line_no, "expected 5 fields");
    if (detail::parse_int<NodeId>(fields[0], line_no, "source") != block_source) {
      throw ParseError(line_no, "row source does not match block landmark");
    }
    if (detail::parse_int<std::size_t>(fields[1], line_no, "node") != dist->size()) {
      throw ParseError(line_no, "rows must list nodes in order");
    }
    dist->push_back(fields[2] == "inf" ? kInf : detail::parse_real(fields[2], line_no, "dist"));
    const auto p = detail::parse_int<long long>(fields[3], line_no, "pred");
    pred->push_back(p < 0 ? kNoNode : static_cast<NodeId>(p));
  }
  if (index.landmarks_.empty() || index.dist_to_.size() != index.landmarks_.size()) {
    throw ParseError(line_no, "incomplete landmark index");
  }
  index.node_count_ = index.dist_from_.front().size();
  for (std::size_t i = 0; i < index.landmarks_.size(); ++i) {
    if (index.dist_from_[i].size() != index.node_count_ || index.dist_to_[i].size() != index.node_count_) {
      throw ParseError(line_no, "landmark blocks have inconsistent node counts");
    }
  }
  return index;
}

}  // namespace gnnsde
