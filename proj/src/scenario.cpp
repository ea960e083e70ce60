#include "mrcwpt/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <complex>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "mrcwpt/error.hpp"

namespace mrcwpt {

namespace {

std::string bare_message(const ValidationError& e) {
  std::string msg = e.what();
  const std::string prefix = e.field() + ": ";
  if (!e.field().empty() && msg.rfind(prefix, 0) == 0) msg.erase(0, prefix.size());
  return msg;
}

class Reader {
 public:
  explicit Reader(std::string where) : where_(std::move(where)) {}

  [[noreturn]] void fail(const YAML::Node& node, const std::string& msg) const {
    const auto m = node.Mark();
    throw ParseError(where_, m.line + 1, m.column + 1, msg);
  }

  void expect_map(const YAML::Node& node, const std::string& path, const std::set<std::string>& allowed) const {
    if (!node.IsMap()) fail(node, path + ": expected a mapping");
    for (const auto& kv : node) {
      const std::string key = kv.first.as<std::string>();
      if (!allowed.count(key)) fail(kv.first, path + ": unknown key '" + key + "'");
    }
  }

  double number(const YAML::Node& node, const std::string& path) const {
    if (!node.IsScalar()) fail(node, path + ": expected a number");
    const std::string& s = node.Scalar();
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || *end != '\0' || !std::isfinite(v)) fail(node, path + ": '" + s + "' is not a finite number");
    return v;
  }

  double number(const YAML::Node& map, const char* key, const std::string& path) const {
    const YAML::Node n = map[key];
    if (!n) fail(map, path + "." + key + ": missing");
    return number(n, path + "." + key);
  }

  double number_or(const YAML::Node& map, const char* key, const std::string& path, double fallback) const {
    const YAML::Node n = map[key];
    return n ? number(n, path + "." + key) : fallback;
  }

  long integer_or(const YAML::Node& map, const char* key, const std::string& path, long fallback) const {
    const YAML::Node n = map[key];
    if (!n) return fallback;
    const double v = number(n, path + "." + key);
    if (v != std::floor(v) || std::abs(v) > 1e15) fail(n, path + "." + key + ": expected an integer");
    return static_cast<long>(v);
  }

  Vec3 vec3(const YAML::Node& node, const std::string& path) const {
    if (!node.IsSequence() || node.size() != 3) fail(node, path + ": expected [x, y, z]");
    return {number(node[0], path), number(node[1], path), number(node[2], path)};
  }

  const std::string& where() const { return where_; }

 private:
  std::string where_;
};

struct CoilBlock {
  CoilElectrical electrical;
  std::optional<CoilGeometry> geometry;
};

CoilBlock read_coil(const Reader& rd, const YAML::Node& node, const std::string& path,
                    std::vector<std::string>& warnings) {
  const YAML::Node el = node["electrical"], geo = node["geometry"];
  if (bool(el) == bool(geo)) rd.fail(node, path + ": give exactly one of 'electrical' or 'geometry'");
  CoilBlock out;
  if (el) {
    rd.expect_map(el, path + ".electrical", {"r", "l"});
    out.electrical.r = rd.number(el, "r", path + ".electrical");
    out.electrical.l = rd.number(el, "l", path + ".electrical");
    return out;
  }
  rd.expect_map(geo, path + ".geometry", {"inner_radius", "outer_radius", "turns", "resistivity", "center", "normal"});
  CoilGeometry g;
  const std::string gp = path + ".geometry";
  g.inner_radius = rd.number(geo, "inner_radius", gp);
  g.outer_radius = rd.number(geo, "outer_radius", gp);
  const long turns = rd.integer_or(geo, "turns", gp, 0);
  if (!geo["turns"]) rd.fail(geo, gp + ".turns: missing");
  g.turns = static_cast<int>(turns);
  g.wire_resistivity = rd.number(geo, "resistivity", gp);
  if (geo["center"]) g.center = rd.vec3(geo["center"], gp + ".center");
  if (geo["normal"]) g.normal = rd.vec3(geo["normal"], gp + ".normal");
  try {
    validate_geometry(g);
  } catch (const ValidationError& e) {
    throw ValidationError(bare_message(e), gp + "." + e.field());
  }
  for (const auto& w : geometry_warnings(g)) warnings.push_back(gp + ": " + w);
  out.electrical = derive_coil_electrical(g);
  out.geometry = g;
  return out;
}

}  // namespace

Scenario parse_scenario_text(const std::string& text, const std::string& where) {
  Reader rd(where);
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ParseError(where, e.mark.line + 1, e.mark.column + 1, e.msg);
  }
  if (!root.IsMap()) throw ParseError(where, 1, 1, "expected a mapping at top level");
  rd.expect_map(root, "scenario", {"version", "source", "transmitter", "receivers", "options"});

  Scenario sc;
  if (!root["version"]) rd.fail(root, "version: missing");
  sc.version = static_cast<int>(rd.integer_or(root, "version", "", 1));
  if (sc.version != 1) rd.fail(root["version"], "version: only version 1 is supported");

  const YAML::Node src = root["source"];
  if (!src) rd.fail(root, "source: missing");
  rd.expect_map(src, "source", {"v_tx", "phase", "w"});
  sc.v_magnitude = rd.number(src, "v_tx", "source");
  sc.v_phase = rd.number_or(src, "phase", "source", 0.0);
  sc.sys.v_tx = std::polar(sc.v_magnitude, sc.v_phase);
  if (!(std::abs(sc.sys.v_tx) > 0.0)) throw ValidationError("must be > 0", "source.v_tx");
  sc.sys.w = rd.number(src, "w", "source");
  if (!(sc.sys.w > 0.0)) throw ValidationError("must be > 0", "source.w");

  const YAML::Node tx = root["transmitter"];
  if (!tx) rd.fail(root, "transmitter: missing");
  rd.expect_map(tx, "transmitter", {"electrical", "geometry"});
  const CoilBlock txc = read_coil(rd, tx, "transmitter", sc.warnings);
  sc.sys.transmitter = txc.electrical;
  sc.transmitter_geometry = txc.geometry;

  const YAML::Node rxs = root["receivers"];
  if (!rxs || !rxs.IsSequence() || rxs.size() == 0) rd.fail(rxs ? rxs : root, "receivers: expected a non-empty list");
  std::map<std::string, YAML::Mark> marks;
  for (std::size_t n = 0; n < rxs.size(); ++n) {
    const YAML::Node node = rxs[n];
    const std::string path = "receiver." + std::to_string(n + 1);
    rd.expect_map(node, path, {"electrical", "geometry", "h", "x_lo", "x_hi", "p_req"});
    marks[path] = node.Mark();
    const CoilBlock c = read_coil(rd, node, path, sc.warnings);
    ReceiverConfig rx;
    rx.coil = c.electrical;
    const YAML::Node h = node["h"];
    if (!h) {
      rd.fail(node, path + ".h: missing (a number in H, or 'derive')");
    } else if (h.IsScalar() && h.Scalar() == "derive") {
      if (!c.geometry || !sc.transmitter_geometry)
        throw ValidationError("'derive' needs geometry for this receiver and the transmitter", path + ".h");
      try {
        rx.h = mutual_inductance(*sc.transmitter_geometry, *c.geometry);
      } catch (const ValidationError& e) {
        throw ValidationError(bare_message(e), path + ".h");
      }
      if (!dipole_approximation_valid(*sc.transmitter_geometry, *c.geometry))
        sc.warnings.push_back(path + ".h: coils are closer than the dipole formula is trusted");
    } else {
      rx.h = rd.number(h, path + ".h");
    }
    rx.x_lo = rd.number(node, "x_lo", path);
    rx.x_hi = rd.number(node, "x_hi", path);
    rx.p_req = rd.number(node, "p_req", path);
    sc.sys.receivers.push_back(rx);
    sc.receiver_geometry.push_back(c.geometry);
  }

  if (const YAML::Node opt = root["options"]) {
    rd.expect_map(opt, "options",
                  {"dx", "itr_max", "window_rounds", "dp_stop", "tau_total", "grid_resolution", "w_values"});
    auto& o = sc.options;
    o.dx = rd.number_or(opt, "dx", "options", o.dx);
    o.itr_max = rd.integer_or(opt, "itr_max", "options", o.itr_max);
    o.window_rounds = rd.integer_or(opt, "window_rounds", "options", o.window_rounds);
    o.dp_stop = rd.number_or(opt, "dp_stop", "options", o.dp_stop);
    o.tau_total = rd.number_or(opt, "tau_total", "options", o.tau_total);
    const long res = rd.integer_or(opt, "grid_resolution", "options", 0);
    if (res < 0 || res == 1) throw ValidationError("must be 0 (default) or >= 2", "options.grid_resolution");
    o.grid_resolution = static_cast<std::size_t>(res);
    if (const YAML::Node ws = opt["w_values"]) {
      if (!ws.IsSequence()) rd.fail(ws, "options.w_values: expected a list");
      for (const auto& w : ws) {
        o.w_values.push_back(rd.number(w, "options.w_values"));
        if (!(o.w_values.back() > 0.0)) throw ValidationError("must be > 0", "options.w_values");
      }
    }
    if (!(o.dx > 0.0)) throw ValidationError("must be > 0", "options.dx");
    if (o.itr_max < 1) throw ValidationError("must be >= 1", "options.itr_max");
    if (o.window_rounds < 1) throw ValidationError("must be >= 1", "options.window_rounds");
    if (!(o.dp_stop >= 0.0)) throw ValidationError("must be >= 0", "options.dp_stop");
    if (!(o.tau_total > 0.0)) throw ValidationError("must be > 0", "options.tau_total");
  }

  try {
    sc.sys.validate();
  } catch (const ValidationError& e) {
    // Point at the receiver entry in the file when the field names one.
    const std::string& f = e.field();
    const auto dot = f.find('.', f.find('.') + 1);
    const auto it = marks.find(f.substr(0, dot));
    if (it == marks.end()) throw;
    throw ValidationError(bare_message(e) + " (" + where + ":" + std::to_string(it->second.line + 1) + ")", f);
  }
  sc.sys = sc.sys.retuned(sc.sys.w);
  return sc;
}

Scenario parse_scenario(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ValidationError("cannot open '" + path + "'", "scenario");
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_scenario_text(ss.str(), path);
}

std::string serialize_scenario(const Scenario& sc) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;
  out << YAML::Key << "version" << YAML::Value << sc.version;
  out << YAML::Key << "source" << YAML::Value << YAML::BeginMap;
  const bool stored = std::polar(sc.v_magnitude, sc.v_phase) == sc.sys.v_tx;
  out << YAML::Key << "v_tx" << YAML::Value << (stored ? sc.v_magnitude : std::abs(sc.sys.v_tx));
  out << YAML::Key << "phase" << YAML::Value << (stored ? sc.v_phase : std::arg(sc.sys.v_tx));
  out << YAML::Key << "w" << YAML::Value << sc.sys.w;
  out << YAML::EndMap;

  const auto electrical = [&](const CoilElectrical& c) {
    out << YAML::Key << "electrical" << YAML::Value << YAML::Flow << YAML::BeginMap;
    out << YAML::Key << "r" << YAML::Value << c.r << YAML::Key << "l" << YAML::Value << c.l;
    out << YAML::EndMap;
  };
  out << YAML::Key << "transmitter" << YAML::Value << YAML::BeginMap;
  electrical(sc.sys.transmitter);
  out << YAML::EndMap;

  out << YAML::Key << "receivers" << YAML::Value << YAML::BeginSeq;
  for (const auto& rx : sc.sys.receivers) {
    out << YAML::BeginMap;
    electrical(rx.coil);
    out << YAML::Key << "h" << YAML::Value << rx.h;
    out << YAML::Key << "x_lo" << YAML::Value << rx.x_lo;
    out << YAML::Key << "x_hi" << YAML::Value << rx.x_hi;
    out << YAML::Key << "p_req" << YAML::Value << rx.p_req;
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;

  const auto& o = sc.options;
  out << YAML::Key << "options" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "dx" << YAML::Value << o.dx;
  out << YAML::Key << "itr_max" << YAML::Value << o.itr_max;
  out << YAML::Key << "window_rounds" << YAML::Value << o.window_rounds;
  out << YAML::Key << "dp_stop" << YAML::Value << o.dp_stop;
  out << YAML::Key << "tau_total" << YAML::Value << o.tau_total;
  out << YAML::Key << "grid_resolution" << YAML::Value << o.grid_resolution;
  if (!o.w_values.empty()) out << YAML::Key << "w_values" << YAML::Value << YAML::Flow << o.w_values;
  out << YAML::EndMap;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace mrcwpt
