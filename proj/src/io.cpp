#include "mfnet/io.hpp"

#include <iomanip>
#include <sstream>

#include "mfnet/errors.hpp"

namespace mfnet {

namespace {

std::vector<double> doubles(const Json& doc, const char* key) {
  if (!doc.contains(key)) throw ValidationError(std::string("model: missing field '") + key + "'");
  try {
    return doc.at(key).get<std::vector<double>>();
  } catch (const Json::exception& e) {
    throw ValidationError(std::string("model: field '") + key + "' must be an array of numbers");
  }
}

std::vector<int> ints(const Json& doc, const char* key) {
  if (!doc.contains(key)) throw ValidationError(std::string("model: missing field '") + key + "'");
  try {
    return doc.at(key).get<std::vector<int>>();
  } catch (const Json::exception&) {
    throw ValidationError(std::string("model: field '") + key + "' must be an array of integers");
  }
}

// Read a rank-4 nested array with the given extents into `set(a,b,c,d,value)`.
template <typename Set>
void read4(const Json& arr, const char* name, std::size_t n0, std::size_t n1, std::size_t n2, std::size_t n3,
           Set&& set) {
  auto fail = [name] { throw ValidationError(std::string("model: '") + name + "' has the wrong shape"); };
  if (!arr.is_array() || arr.size() != n0) fail();
  for (std::size_t a = 0; a < n0; ++a) {
    if (!arr[a].is_array() || arr[a].size() != n1) fail();
    for (std::size_t b = 0; b < n1; ++b) {
      if (!arr[a][b].is_array() || arr[a][b].size() != n2) fail();
      for (std::size_t c = 0; c < n2; ++c) {
        if (!arr[a][b][c].is_array() || arr[a][b][c].size() != n3) fail();
        for (std::size_t d = 0; d < n3; ++d) {
          if (!arr[a][b][c][d].is_number()) fail();
          set(a, b, c, d, arr[a][b][c][d].get<double>());
        }
      }
    }
  }
}

}  // namespace

ModelSpec model_from_json(const Json& doc) {
  if (!doc.is_object()) throw ValidationError("model: document must be a JSON object");
  ModelSpec spec;
  if (!doc.contains("spaces")) throw ValidationError("model: missing field 'spaces'");
  const Json& sp = doc.at("spaces");
  spec.spaces.node = IndexedStates(ints(sp, "node_states"));
  spec.spaces.edge = IndexedStates(ints(sp, "edge_states"));
  spec.spaces.marks = IndexedStates(ints(sp, "jump_marks"));
  const std::size_t ny = spec.num_marks(), nx = spec.num_node_states(), ne = spec.num_edge_states();
  spec.rho = doubles(doc, "rho");

  if (doc.contains("clt_example")) {
    const Json& c = doc.at("clt_example");
    CltExample ex;
    ex.c0 = doubles(c, "c0");
    ex.c1 = doubles(c, "c1");
    ex.c2 = doubles(c, "c2");
    ex.c3 = doubles(c, "c3");
    ex.b0 = doubles(c, "b0");
    ex.b1 = doubles(c, "b1");
    ex.b2 = doubles(c, "b2");
    if (!c.contains("epsilon") || !c.at("epsilon").is_number()) throw ValidationError("model: clt_example.epsilon");
    ex.epsilon = c.at("epsilon").get<double>();
    spec.clt = ex;
  }

  if (!doc.contains("gamma_tilde")) throw ValidationError("model: missing field 'gamma_tilde'");
  spec.gamma_tilde = EdgeKernel(ny, nx, ne);
  read4(doc.at("gamma_tilde"), "gamma_tilde", ny, ne, nx, nx,
        [&](auto y, auto xi, auto x, auto xt, double v) { spec.gamma_tilde.at(y, xi, x, xt) = v; });
  spec.gamma = NodeKernel(ny, nx, ne);
  if (doc.contains("gamma")) {
    read4(doc.at("gamma"), "gamma", ny, nx, nx, ne,
          [&](auto y, auto x, auto xt, auto xi, double v) { spec.gamma.at(y, x, xt, xi) = v; });
  } else if (spec.clt) {
    spec.gamma.envelope.clear();
    try {
      apply_clt_kernel(spec);
    } catch (const std::invalid_argument& e) {
      throw ValidationError(std::string("model: ") + e.what());
    }
  } else {
    throw ValidationError("model: missing field 'gamma'");
  }

  if (doc.contains("envelope")) {
    spec.gamma.envelope = doubles(doc, "envelope");
  } else {
    set_tight_envelope(spec);
  }

  if (!doc.contains("beta")) throw ValidationError("model: missing field 'beta'");
  const Json& b = doc.at("beta");
  if (b.is_number()) {
    spec.beta = BetaSchedule::constant(b.get<double>());
  } else if (b.is_object() && b.contains("scale") && b.contains("power")) {
    spec.beta = {b.at("scale").get<double>(), b.at("power").get<double>()};
  } else {
    throw ValidationError("model: 'beta' must be a number or {scale, power}");
  }
  if (!doc.contains("T") || !doc.at("T").is_number()) throw ValidationError("model: missing numeric field 'T'");
  spec.horizon = doc.at("T").get<double>();
  spec.mu0 = doubles(doc, "mu0");
  spec.theta0 = doubles(doc, "theta0");
  return spec;
}

Json model_to_json(const ModelSpec& spec) {
  const std::size_t ny = spec.num_marks(), nx = spec.num_node_states(), ne = spec.num_edge_states();
  Json doc;
  doc["spaces"] = {{"node_states", spec.spaces.node.values()},
                   {"edge_states", spec.spaces.edge.values()},
                   {"jump_marks", spec.spaces.marks.values()}};
  doc["rho"] = spec.rho;
  Json g = Json::array(), gt = Json::array();
  for (std::size_t y = 0; y < ny; ++y) {
    Json gy = Json::array(), gty = Json::array();
    for (std::size_t a = 0; a < nx; ++a) {
      Json row = Json::array();
      for (std::size_t xt = 0; xt < nx; ++xt) {
        Json cell = Json::array();
        for (std::size_t xi = 0; xi < ne; ++xi) cell.push_back(spec.gamma(y, a, xt, xi));
        row.push_back(cell);
      }
      gy.push_back(row);
    }
    for (std::size_t xi = 0; xi < ne; ++xi) {
      Json row = Json::array();
      for (std::size_t x = 0; x < nx; ++x) {
        Json cell = Json::array();
        for (std::size_t xt = 0; xt < nx; ++xt) cell.push_back(spec.gamma_tilde(y, xi, x, xt));
        row.push_back(cell);
      }
      gty.push_back(row);
    }
    g.push_back(gy);
    gt.push_back(gty);
  }
  doc["gamma"] = g;
  doc["gamma_tilde"] = gt;
  doc["envelope"] = spec.gamma.envelope;
  if (spec.beta.is_constant())
    doc["beta"] = spec.beta.scale;
  else
    doc["beta"] = {{"scale", spec.beta.scale}, {"power", spec.beta.power}};
  doc["T"] = spec.horizon;
  doc["mu0"] = spec.mu0;
  doc["theta0"] = spec.theta0;
  if (spec.clt) {
    const auto& c = *spec.clt;
    doc["clt_example"] = {{"c0", c.c0}, {"c1", c.c1}, {"c2", c.c2}, {"c3", c.c3},
                          {"b0", c.b0}, {"b1", c.b1}, {"b2", c.b2}, {"epsilon", c.epsilon}};
  }
  return doc;
}

Json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

void save_json(const Json& doc, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << doc.dump(2) << '\n';
}

ModelSpec load_model(const std::string& path) { return model_from_json(load_json(path)); }

void save_model(const ModelSpec& spec, const std::string& path) { save_json(model_to_json(spec), path); }

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header) : out_(path) {
  if (!out_) throw std::runtime_error("cannot open " + path);
  out_.imbue(std::locale::classic());
  out_ << std::setprecision(17);
  for (std::size_t k = 0; k < header.size(); ++k) out_ << (k ? "," : "") << header[k];
  out_ << '\n';
}

void CsvWriter::row(const std::vector<double>& cells) {
  for (std::size_t k = 0; k < cells.size(); ++k) out_ << (k ? "," : "") << cells[k];
  out_ << '\n';
}

Json rate_fit_to_json(const RateFit& fit) {
  return {{"xs", fit.xs},       {"errors", fit.errors},   {"ses", fit.ses},          {"slope", fit.slope},
          {"intercept", fit.intercept}, {"ci_low", fit.ci_low}, {"ci_high", fit.ci_high}};
}

void write_rate_fit_csv(const RateFit& fit, const std::string& path) {
  CsvWriter csv(path, {"x", "error", "se"});
  for (std::size_t k = 0; k < fit.xs.size(); ++k)
    csv.row(fit.xs[k], fit.errors[k], fit.ses.empty() ? 0.0 : fit.ses[k]);
}

void write_trajectory_csv(const TrajectoryLog& log, const std::string& path) {
  CsvWriter csv(path, {"entity_kind", "i", "j", "time", "new_state"});
  for (std::size_t i = 0; i < log.nodes.size(); ++i) {
    csv.row("node", i + 1, 0, 0.0, log.nodes[i].initial);
    for (const auto& [t, v] : log.nodes[i].jumps) csv.row("node", i + 1, 0, t, v);
  }
  for (const auto& e : log.edges) csv.row("edge", e.i + 1, e.j + 1, e.time, e.state);
}

}  // namespace mfnet
