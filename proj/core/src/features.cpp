#include "treecon/features.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "treecon/error.hpp"

namespace treecon {

using nlohmann::json;

namespace {

void require_finite(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) throw DomainError(std::string("non-finite value in ") + what);
  }
}

std::vector<double> read_vector(const json& node, std::size_t line, const char* field) {
  if (!node.is_array()) {
    throw SchemaError("line " + std::to_string(line) + ": '" + field + "' entries must be arrays");
  }
  std::vector<double> out;
  out.reserve(node.size());
  for (const auto& v : node) {
    if (!v.is_number()) {
      throw SchemaError("line " + std::to_string(line) + ": '" + field + "' holds a non-number");
    }
    out.push_back(v.get<double>());
  }
  return out;
}

void split_csv_line(std::string_view line, std::vector<std::string_view>& cells) {
  cells.clear();
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.push_back(line.substr(start));
      return;
    }
    cells.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

Dataset::Dataset(std::size_t dim, std::vector<FeatureVector> points)
    : dim_(dim), points_(std::move(points)) {
  if (dim_ == 0) throw DomainError("dataset dimension must be positive");
  for (const auto& p : points_) {
    if (p.size() != dim_) throw SchemaError("dataset point has wrong dimension");
    require_finite(p, "dataset point");
  }
}

bool FeatureBounds::contains(std::span<const double> point) const {
  if (point.size() != min.size()) throw DomainError("point dimension does not match bounds");
  for (std::size_t j = 0; j < point.size(); ++j) {
    if (point[j] < min[j] || point[j] > max[j]) return false;
  }
  return true;
}

std::string format_double(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, end);
}

std::string format_double_17(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, 17);
  return std::string(buf, end);
}

double parse_double(std::string_view text) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw ParseError("not a number: '" + std::string(text) + "'");
  }
  return value;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

std::vector<Trajectory> parse_trajectories_jsonl(std::string_view text) {
  std::vector<Trajectory> out;
  std::size_t state_dim = 0;
  std::size_t action_dim = 0;
  bool have_dims = false;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    const auto line = trim(text.substr(pos, nl - pos));
    pos = nl + 1;
    ++line_no;
    if (line.empty()) continue;

    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!record.is_object() || !record.contains("states") || !record.contains("actions")) {
      throw SchemaError("line " + std::to_string(line_no) + ": expected {\"states\", \"actions\"}");
    }
    const auto& states = record["states"];
    const auto& actions = record["actions"];
    if (!states.is_array() || !actions.is_array() || states.size() != actions.size()) {
      throw SchemaError("line " + std::to_string(line_no) +
                        ": states and actions must be arrays of equal length");
    }
    if (states.empty()) throw SchemaError("line " + std::to_string(line_no) + ": empty trajectory");

    Trajectory traj;
    traj.steps.reserve(states.size());
    for (std::size_t t = 0; t < states.size(); ++t) {
      Step step{read_vector(states[t], line_no, "states"), read_vector(actions[t], line_no, "actions")};
      if (!have_dims) {
        state_dim = step.state.size();
        action_dim = step.action.size();
        have_dims = true;
      }
      if (step.state.size() != state_dim || step.action.size() != action_dim) {
        throw SchemaError("line " + std::to_string(line_no) + ": inconsistent state/action dimension");
      }
      try {
        require_finite(step.state, "state");
        require_finite(step.action, "action");
      } catch (const DomainError& e) {
        throw SchemaError("line " + std::to_string(line_no) + ": " + e.what());
      }
      traj.steps.push_back(std::move(step));
    }
    out.push_back(std::move(traj));
  }
  return out;
}

std::vector<Trajectory> load_trajectories(const std::filesystem::path& path, TrajectoryFormat format) {
  switch (format) {
    case TrajectoryFormat::jsonl:
      return parse_trajectories_jsonl(read_text_file(path));
  }
  throw ConfigError("unsupported trajectory format");
}

std::string trajectories_to_jsonl(std::span<const Trajectory> trajectories) {
  std::string out;
  auto append_vec = [&out](const std::vector<double>& v) {
    out += '[';
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) out += ',';
      out += format_double_17(v[i]);
    }
    out += ']';
  };
  for (const auto& traj : trajectories) {
    out += "{\"states\":[";
    for (std::size_t t = 0; t < traj.steps.size(); ++t) {
      if (t) out += ',';
      append_vec(traj.steps[t].state);
    }
    out += "],\"actions\":[";
    for (std::size_t t = 0; t < traj.steps.size(); ++t) {
      if (t) out += ',';
      append_vec(traj.steps[t].action);
    }
    out += "]}\n";
  }
  return out;
}

void save_trajectories(const std::filesystem::path& path, std::span<const Trajectory> trajectories) {
  write_text_file(path, trajectories_to_jsonl(trajectories));
}

bool has_feature_map(std::string_view name) { return name == "identity_xy"; }

std::size_t feature_map_dim(std::string_view name) {
  if (name == "identity_xy") return 2;
  throw ConfigError("unknown feature map '" + std::string(name) + "'");
}

FeatureVector apply_feature_map(std::string_view name, const Step& step) {
  if (name == "identity_xy") {
    if (step.state.size() < 2) throw SchemaError("identity_xy needs a state with at least 2 components");
    return {step.state[0], step.state[1]};
  }
  throw ConfigError("unknown feature map '" + std::string(name) + "'");
}

Dataset build_dataset(std::span<const Trajectory> trajectories, std::string_view feature_map) {
  const auto k = feature_map_dim(feature_map);
  std::vector<FeatureVector> points;
  for (const auto& traj : trajectories) {
    for (const auto& step : traj.steps) points.push_back(apply_feature_map(feature_map, step));
  }
  return Dataset(k, std::move(points));
}

FeatureBounds feature_bounds(const Dataset& dataset) {
  if (dataset.empty()) throw DomainError("feature_bounds of an empty dataset");
  FeatureBounds b{dataset[0], dataset[0]};
  for (const auto& p : dataset.points()) {
    for (std::size_t j = 0; j < p.size(); ++j) {
      b.min[j] = std::min(b.min[j], p[j]);
      b.max[j] = std::max(b.max[j], p[j]);
    }
  }
  return b;
}

std::string dataset_to_csv(const Dataset& dataset) {
  std::string out;
  for (std::size_t j = 0; j < dataset.dim(); ++j) {
    if (j) out += ',';
    out += "phi" + std::to_string(j);
  }
  out += '\n';
  for (const auto& p : dataset.points()) {
    for (std::size_t j = 0; j < p.size(); ++j) {
      if (j) out += ',';
      out += format_double_17(p[j]);
    }
    out += '\n';
  }
  return out;
}

Dataset parse_dataset_csv(std::string_view text) {
  std::vector<std::string_view> cells;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  std::size_t dim = 0;
  std::vector<FeatureVector> points;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    const auto line = trim(text.substr(pos, nl - pos));
    pos = nl + 1;
    ++line_no;
    if (line.empty()) continue;
    split_csv_line(line, cells);
    if (dim == 0) {
      for (std::size_t j = 0; j < cells.size(); ++j) {
        if (trim(cells[j]) != "phi" + std::to_string(j)) {
          throw ParseError("line " + std::to_string(line_no) + ": expected header phi0,phi1,...");
        }
      }
      dim = cells.size();
      continue;
    }
    if (cells.size() != dim) {
      throw SchemaError("line " + std::to_string(line_no) + ": expected " + std::to_string(dim) + " columns");
    }
    FeatureVector p(dim);
    for (std::size_t j = 0; j < dim; ++j) {
      try {
        p[j] = parse_double(cells[j]);
      } catch (const ParseError& e) {
        throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
      }
      if (!std::isfinite(p[j])) throw SchemaError("line " + std::to_string(line_no) + ": non-finite value");
    }
    points.push_back(std::move(p));
  }
  if (dim == 0) throw ParseError("missing CSV header");
  return Dataset(dim, std::move(points));
}

void save_dataset_csv(const std::filesystem::path& path, const Dataset& dataset) {
  write_text_file(path, dataset_to_csv(dataset));
}

Dataset load_dataset_csv(const std::filesystem::path& path) {
  return parse_dataset_csv(read_text_file(path));
}

}  // namespace treecon
