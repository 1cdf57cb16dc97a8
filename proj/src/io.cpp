#include "nncis/io.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "json_util.hpp"

namespace nncis {

namespace {

using nlohmann::json;
using detail::require;

std::vector<double> to_std(const Eigen::VectorXd& v) {
  return {v.data(), v.data() + v.size()};
}

Eigen::VectorXd vec_field(const json& obj, const std::string& key, const std::string& where,
                          Eigen::Index expect = -1) {
  const auto v = require<std::vector<double>>(obj, key, where);
  if (expect >= 0 && static_cast<Eigen::Index>(v.size()) != expect) {
    throw Error(ErrorCode::SchemaError, where + "." + key + ": expected " +
                                            std::to_string(expect) + " entries");
  }
  for (double x : v) {
    if (!std::isfinite(x)) throw Error(ErrorCode::SchemaError, where + "." + key + ": non-finite entry");
  }
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<std::int64_t> int_field(const json& obj, const std::string& key,
                                    const std::string& where, std::size_t expect) {
  const auto v = require<std::vector<std::int64_t>>(obj, key, where);
  if (v.size() != expect) {
    throw Error(ErrorCode::SchemaError, where + "." + key + ": expected " +
                                            std::to_string(expect) + " entries");
  }
  return v;
}

void check_format(const json& doc, const std::string& format, const std::string& where) {
  if (!doc.is_object()) throw Error(ErrorCode::SchemaError, where + ": document is not an object");
  if (doc.contains("format") && doc["format"] != format) {
    throw Error(ErrorCode::SchemaError, where + ": format must be \"" + format + "\"");
  }
}

RealBox real_box(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi, const std::string& where) {
  try {
    return RealBox(lo, hi);
  } catch (const Error& e) {
    throw Error(ErrorCode::SchemaError, where + ": " + e.what());
  }
}

json box_list(const std::vector<GridBox>& boxes) {
  json arr = json::array();
  for (const auto& b : boxes) arr.push_back({{"lo", b.lo}, {"hi", b.hi}});
  return arr;
}

std::vector<GridBox> parse_box_list(const json& arr, const std::string& where, std::size_t n) {
  if (!arr.is_array()) throw Error(ErrorCode::SchemaError, where + ": expected an array");
  std::vector<GridBox> out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string w = where + "[" + std::to_string(i) + "]";
    out.push_back({int_field(arr[i], "lo", w, n), int_field(arr[i], "hi", w, n)});
  }
  return out;
}

BoxSet make_set(const GridSpec& grid, std::vector<GridBox> boxes, const std::string& where) {
  try {
    return BoxSet(grid, std::move(boxes));
  } catch (const Error& e) {
    throw Error(ErrorCode::SchemaError, where + ": " + e.what());
  }
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

BoxSet Scenario::safe_set() const {
  const GridSpec g = grid();
  if (!safe_boxes.empty()) return quantize_safe_set(g, safe_boxes);
  return quantize_safe_set(g, safe_halfspaces);
}

Scenario scenario_from_json_text(const std::string& text) {
  const json doc = detail::parse_json(text, "scenario");
  const std::string where = "scenario";
  check_format(doc, "nncis-scenario", where);
  Scenario s;
  s.state_lower = vec_field(doc, "state_lower", where);
  const auto n = s.state_lower.size();
  if (n == 0) throw Error(ErrorCode::SchemaError, where + ".state_lower: empty");
  s.state_upper = vec_field(doc, "state_upper", where, n);
  const Eigen::VectorXd ul = vec_field(doc, "control_lower", where);
  const Eigen::VectorXd uh = vec_field(doc, "control_upper", where, ul.size());
  s.control = real_box(ul, uh, where + ".control");
  s.d_min = require<double>(doc, "d_min", where);

  const auto& safe = detail::require_field(doc, "safe_set", where);
  if (safe.contains("boxes")) {
    const auto& arr = safe["boxes"];
    if (!arr.is_array()) throw Error(ErrorCode::SchemaError, where + ".safe_set.boxes: expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string w = where + ".safe_set.boxes[" + std::to_string(i) + "]";
      s.safe_boxes.push_back(real_box(vec_field(arr[i], "lo", w, n), vec_field(arr[i], "hi", w, n), w));
    }
  } else if (safe.contains("halfspaces")) {
    const auto& arr = safe["halfspaces"];
    if (!arr.is_array()) {
      throw Error(ErrorCode::SchemaError, where + ".safe_set.halfspaces: expected an array");
    }
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string w = where + ".safe_set.halfspaces[" + std::to_string(i) + "]";
      s.safe_halfspaces.push_back({vec_field(arr[i], "normal", w, n), require<double>(arr[i], "offset", w)});
    }
  } else {
    throw Error(ErrorCode::SchemaError, where + ".safe_set: needs \"boxes\" or \"halfspaces\"");
  }
  if (s.safe_boxes.empty() && s.safe_halfspaces.empty()) {
    throw Error(ErrorCode::SchemaError, where + ".safe_set: no boxes or halfspaces given");
  }

  if (doc.contains("lane_keeping")) {
    const auto& lk = doc["lane_keeping"];
    const std::string w = where + ".lane_keeping";
    LaneKeepingParams p;
    p.l1 = require<double>(lk, "l1", w);
    p.l2 = require<double>(lk, "l2", w);
    p.w = require<double>(lk, "w", w);
    p.v = require<double>(lk, "v", w);
    p.dt = require<double>(lk, "dt", w);
    p.u_max_deg = require<double>(lk, "u_max_deg", w);
    p.divisor = require<int>(lk, "divisor", w);
    s.lane_keeping = p;
  }
  // Validates bounds and resolution.
  (void)s.grid();
  return s;
}

std::string scenario_to_json_text(const Scenario& s) {
  json doc;
  doc["format"] = "nncis-scenario";
  doc["version"] = 1;
  doc["state_lower"] = to_std(s.state_lower);
  doc["state_upper"] = to_std(s.state_upper);
  doc["control_lower"] = to_std(s.control.lo);
  doc["control_upper"] = to_std(s.control.hi);
  doc["d_min"] = s.d_min;
  json safe;
  if (!s.safe_boxes.empty()) {
    safe["boxes"] = json::array();
    for (const auto& b : s.safe_boxes) safe["boxes"].push_back({{"lo", to_std(b.lo)}, {"hi", to_std(b.hi)}});
  } else {
    safe["halfspaces"] = json::array();
    for (const auto& h : s.safe_halfspaces) {
      safe["halfspaces"].push_back({{"normal", to_std(h.normal)}, {"offset", h.offset}});
    }
  }
  doc["safe_set"] = safe;
  if (s.lane_keeping) {
    const auto& p = *s.lane_keeping;
    doc["lane_keeping"] = {{"l1", p.l1}, {"l2", p.l2}, {"w", p.w}, {"v", p.v},
                           {"dt", p.dt}, {"u_max_deg", p.u_max_deg}, {"divisor", p.divisor}};
  }
  return doc.dump(2);
}

Scenario load_scenario(const std::filesystem::path& path) {
  return scenario_from_json_text(read_text(path));
}

void save_scenario(const Scenario& s, const std::filesystem::path& path) {
  detail::write_text_file(path, scenario_to_json_text(s) + "\n");
}

ControlAtlas atlas_from_json_text(const std::string& text) {
  const json doc = detail::parse_json(text, "cis");
  const std::string where = "cis";
  check_format(doc, "nncis-cis", where);
  const auto& jg = detail::require_field(doc, "grid", where);
  const Eigen::VectorXd lower = vec_field(jg, "lower", where + ".grid");
  const Eigen::VectorXd upper = vec_field(jg, "upper", where + ".grid", lower.size());
  const double d_min = require<double>(jg, "d_min", where + ".grid");
  GridSpec grid;
  try {
    grid = make_grid(lower, upper, d_min);
  } catch (const Error& e) {
    throw Error(ErrorCode::SchemaError, where + ".grid: " + e.what());
  }
  const std::size_t n = grid.dim();
  const Eigen::VectorXd ul = vec_field(doc, "control_lower", where);
  const Eigen::VectorXd uh = vec_field(doc, "control_upper", where, ul.size());
  const ControlDomain u = real_box(ul, uh, where + ".control");

  const auto& jb = detail::require_field(doc, "boxes", where);
  if (!jb.is_array()) throw Error(ErrorCode::SchemaError, where + ".boxes: expected an array");
  std::vector<AtlasEntry> entries;
  std::vector<GridBox> boxes;
  for (std::size_t i = 0; i < jb.size(); ++i) {
    const std::string w = where + ".boxes[" + std::to_string(i) + "]";
    AtlasEntry e{{int_field(jb[i], "lo", w, n), int_field(jb[i], "hi", w, n)},
                 vec_field(jb[i], "u", w, ul.size())};
    boxes.push_back(e.box);
    entries.push_back(std::move(e));
  }
  BoxSet cis = make_set(grid, std::move(boxes), where + ".boxes");
  std::optional<ControlAtlas> atlas;
  try {
    atlas.emplace(std::move(cis), std::move(entries), u);
  } catch (const Error& e) {
    throw Error(ErrorCode::SchemaError, where + ".boxes: " + e.what());
  }
  atlas->iterations = require<int>(doc, "iterations", where);
  const auto status = require<std::string>(doc, "status", where);
  if (status == "nonempty") {
    atlas->status = SynthStatus::NonEmpty;
  } else if (status == "empty") {
    atlas->status = SynthStatus::Empty;
  } else {
    throw Error(ErrorCode::SchemaError, where + ".status: expected \"nonempty\" or \"empty\"");
  }
  if (doc.contains("history")) {
    const auto& jh = doc["history"];
    if (!jh.is_array()) throw Error(ErrorCode::SchemaError, where + ".history: expected an array");
    for (std::size_t i = 0; i < jh.size(); ++i) {
      const std::string w = where + ".history[" + std::to_string(i) + "]";
      atlas->history.push_back(make_set(grid, parse_box_list(jh[i], w, n), w));
    }
  }
  return std::move(*atlas);
}

std::string atlas_to_json_text(const ControlAtlas& atlas) {
  const auto& g = atlas.grid();
  json doc;
  doc["format"] = "nncis-cis";
  doc["version"] = 1;
  doc["grid"] = {{"lower", to_std(g.lower())}, {"upper", to_std(g.upper())}, {"d_min", g.d_min()},
                 {"cells", g.cells()}};
  doc["control_lower"] = to_std(atlas.u_domain().lo);
  doc["control_upper"] = to_std(atlas.u_domain().hi);
  doc["iterations"] = atlas.iterations;
  doc["status"] = atlas.status == SynthStatus::NonEmpty ? "nonempty" : "empty";
  doc["cell_count"] = atlas.cis().cell_count();
  json boxes = json::array();
  for (const auto& e : atlas.entries()) {
    boxes.push_back({{"lo", e.box.lo}, {"hi", e.box.hi}, {"u", to_std(e.u)}});
  }
  doc["boxes"] = std::move(boxes);
  if (!atlas.history.empty()) {
    json h = json::array();
    for (const auto& s : atlas.history) h.push_back(box_list(s.boxes()));
    doc["history"] = std::move(h);
  }
  return doc.dump(2);
}

ControlAtlas load_atlas(const std::filesystem::path& path) {
  return atlas_from_json_text(read_text(path));
}

void save_atlas(const ControlAtlas& atlas, const std::filesystem::path& path) {
  detail::write_text_file(path, atlas_to_json_text(atlas) + "\n");
}

Eigen::VectorXd parse_vector(const std::string& text) {
  std::string s = text;
  for (char& c : s) {
    if (c == ',' || c == ';') c = ' ';
  }
  std::istringstream in(s);
  std::vector<double> v;
  std::string tok;
  while (in >> tok) {
    std::size_t used = 0;
    double x = 0.0;
    try {
      x = std::stod(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != tok.size() || !std::isfinite(x)) {
      throw Error(ErrorCode::SchemaError, "not a number: \"" + tok + "\"");
    }
    v.push_back(x);
  }
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<Eigen::VectorXd> load_reference_csv(const std::filesystem::path& path, int n_x) {
  std::istringstream in(read_text(path));
  const std::string where = path.string();
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::SchemaError, where + ": empty file");
  std::map<int, Eigen::VectorXd> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Eigen::VectorXd v;
    try {
      v = parse_vector(line);
    } catch (const Error& e) {
      throw Error(ErrorCode::SchemaError, where + ":" + std::to_string(lineno) + ": " + e.what());
    }
    if (v.size() != n_x + 1 || v(0) < 0 || v(0) != std::floor(v(0))) {
      throw Error(ErrorCode::SchemaError, where + ":" + std::to_string(lineno) +
                                              ": expected step,xr0..xr" + std::to_string(n_x - 1));
    }
    rows[static_cast<int>(v(0))] = v.tail(n_x);
  }
  if (rows.empty()) throw Error(ErrorCode::SchemaError, where + ": no reference rows");
  std::vector<Eigen::VectorXd> table;
  Eigen::VectorXd current = rows.begin()->second;
  for (int k = 0; k <= rows.rbegin()->first; ++k) {
    if (auto it = rows.find(k); it != rows.end()) current = it->second;
    table.push_back(current);
  }
  return table;
}

std::string trajectory_to_csv(const Trajectory& t) {
  std::ostringstream out;
  out << std::setprecision(17);
  const auto n_x = t.states.empty() ? 0 : t.states.front().size();
  const auto n_u = t.controls.empty() ? 0 : t.controls.front().size();
  out << "step";
  for (Eigen::Index i = 0; i < n_x; ++i) out << ",x" << i;
  for (Eigen::Index i = 0; i < n_u; ++i) out << ",u" << i;
  out << ",feasible,in_cis,obj,solve_ms,nodes,fallback\n";
  for (std::size_t k = 0; k < t.states.size(); ++k) {
    out << k;
    for (Eigen::Index i = 0; i < n_x; ++i) out << ',' << t.states[k](i);
    const bool has_step = k < t.controls.size();
    for (Eigen::Index i = 0; i < n_u; ++i) {
      out << ',';
      if (has_step) out << t.controls[k](i);
    }
    out << ',';
    if (has_step) out << int(t.steps[k].feasible);
    out << ',' << int(k < t.in_cis.size() && t.in_cis[k]) << ',';
    if (has_step) {
      const auto& d = t.steps[k];
      out << d.objective << ',' << d.solve_ms << ',' << d.nodes << ',' << int(d.fallback);
    } else {
      out << ",,,";
    }
    out << '\n';
  }
  return out.str();
}

void save_trajectory_csv(const Trajectory& t, const std::filesystem::path& path) {
  detail::write_text_file(path, trajectory_to_csv(t));
}

}  // namespace nncis
