#pragma once

#include "mcdr/constraint_system.hpp"
#include "mcdr/data_model.hpp"
#include "mcdr/error.hpp"
#include "mcdr/fantope.hpp"
#include "mcdr/instances.hpp"
#include "mcdr/linalg.hpp"
#include "mcdr/report.hpp"
#include "mcdr/rounding/extreme_round.hpp"

#include <json.hpp>

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace mcdr::io {

using json = nlohmann::json;

inline json matrix_to_json(const Matrix& m) {
  json j;
  const bool square = m.rows() == m.cols();
  if (square) {
    j["n"] = m.rows();
  } else {
    j["rows"] = m.rows();
    j["cols"] = m.cols();
  }
  j["sym"] = square && is_symmetric(m, 0.0);
  json data = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  j["data"] = std::move(data);
  return j;
}

inline Matrix matrix_from_json(const json& j) {
  try {
    Eigen::Index rows, cols;
    if (j.contains("rows")) {
      rows = j.at("rows").get<Eigen::Index>();
      cols = j.at("cols").get<Eigen::Index>();
    } else {
      rows = cols = j.at("n").get<Eigen::Index>();
    }
    const auto& data = j.at("data");
    if (!data.is_array() || static_cast<Eigen::Index>(data.size()) != rows * cols)
      throw ParseError("matrix data has " + std::to_string(data.size()) + " entries, expected " +
                       std::to_string(rows * cols));
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = data[static_cast<std::size_t>(r * cols + c)].get<double>();
    if (j.value("sym", false) && !is_symmetric(m)) throw ParseError("matrix marked symmetric is not");
    return m;
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad matrix JSON: ") + e.what());
  }
}

inline json vector_to_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

inline json point_to_json(const FantopePoint& x) { return {{"d", x.d()}, {"X", matrix_to_json(x.X())}}; }

inline FantopePoint point_from_json(const json& j) {
  try {
    return FantopePoint(matrix_from_json(j.at("X")), j.at("d").get<double>());
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad fantope point JSON: ") + e.what());
  }
}

inline json system_to_json(const ConstraintSystem& s) {
  json j;
  j["sense"] = s.sense == Sense::MINIMIZE ? "minimize" : "maximize";
  j["d"] = s.d;
  j["C"] = matrix_to_json(s.C);
  json cs = json::array();
  for (const auto& c : s.constraints) cs.push_back({{"A", matrix_to_json(c.A)}, {"rel", to_string(c.rel)}, {"b", c.b}});
  j["constraints"] = std::move(cs);
  return j;
}

inline ConstraintSystem system_from_json(const json& j) {
  try {
    ConstraintSystem s;
    const std::string sense = j.value("sense", "minimize");
    if (sense == "minimize") s.sense = Sense::MINIMIZE;
    else if (sense == "maximize") s.sense = Sense::MAXIMIZE;
    else throw ParseError("unknown sense '" + sense + "'");
    s.d = j.at("d").get<double>();
    s.C = matrix_from_json(j.at("C"));
    for (const auto& c : j.value("constraints", json::array()))
      s.constraints.push_back({matrix_from_json(c.at("A")), relation_from_string(c.at("rel").get<std::string>()),
                               c.at("b").get<double>()});
    s.validate();
    return s;
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad constraint system JSON: ") + e.what());
  } catch (const InvariantError& e) {
    throw ParseError(e.what());
  }
}

inline json covariances_to_json(const CovarianceSet& cs) {
  json j;
  j["k"] = cs.k();
  j["n"] = cs.n();
  json groups = json::array();
  for (std::size_t i = 0; i < cs.k(); ++i)
    groups.push_back({{"label", cs.labels[i]},
                      {"B", matrix_to_json(cs.B[i])},
                      {"m", cs.m[i]},
                      {"trace", cs.trace[i]},
                      {"scale", cs.scale[i]}});
  j["groups"] = std::move(groups);
  if (cs.beta) j["beta"] = *cs.beta;
  return j;
}

inline CovarianceSet covariances_from_json(const json& j) {
  try {
    std::vector<Matrix> mats;
    std::vector<std::string> labels;
    for (const auto& g : j.at("groups")) {
      mats.push_back(matrix_from_json(g.at("B")));
      labels.push_back(g.value("label", "g" + std::to_string(mats.size())));
    }
    CovarianceSet cs = CovarianceSet::from_matrices(std::move(mats), labels);
    std::size_t i = 0;
    for (const auto& g : j.at("groups")) {
      cs.m[i] = g.value("m", 1.0);
      cs.scale[i] = g.value("scale", 1.0);
      ++i;
    }
    if (j.contains("beta")) cs.beta = j.at("beta").get<std::vector<double>>();
    if (j.contains("k") && j.at("k").get<std::size_t>() != cs.k()) throw ParseError("group count mismatch");
    return cs;
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad covariance JSON: ") + e.what());
  } catch (const InvariantError& e) {
    throw ParseError(e.what());
  }
}

inline json graph_to_json(const Graph& g) {
  json edges = json::array();
  for (const auto& [u, v] : g.edges) edges.push_back({u, v});
  return {{"n", g.n}, {"edges", edges}};
}

inline Graph graph_from_json(const json& j) {
  Graph g;
  g.n = j.at("n").get<int>();
  for (const auto& e : j.at("edges")) g.edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
  return g;
}

inline json bundle_to_json(const InstanceBundle& b) {
  json j;
  j["kind"] = b.kind;
  j["seed"] = b.seed;
  j["d"] = b.d;
  if (b.covariances) j["covariances"] = covariances_to_json(*b.covariances);
  if (b.system) j["system"] = system_to_json(*b.system);
  if (b.graph) j["graph"] = graph_to_json(*b.graph);
  json known = json::array();
  for (const auto& k : b.known) known.push_back({{"name", k.name}, {"value", k.value}, {"source", k.source}});
  j["known"] = std::move(known);
  return j;
}

inline InstanceBundle bundle_from_json(const json& j) {
  try {
    InstanceBundle b;
    b.kind = j.value("kind", "custom");
    b.seed = j.value("seed", std::uint64_t{0});
    b.d = j.value("d", 1.0);
    if (j.contains("covariances")) b.covariances = covariances_from_json(j.at("covariances"));
    if (j.contains("system")) b.system = system_from_json(j.at("system"));
    if (j.contains("graph")) b.graph = graph_from_json(j.at("graph"));
    for (const auto& k : j.value("known", json::array()))
      b.known.push_back({k.at("name").get<std::string>(), k.at("value").get<double>(), k.value("source", "")});
    if (!b.covariances && !b.system) throw ParseError("instance has neither covariances nor a system");
    return b;
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad instance JSON: ") + e.what());
  }
}

inline json report_to_json(const SolveReport& r, bool timing = false) {
  json j;
  j["solver"] = r.solver;
  j["value"] = r.value;
  j["gap"] = r.gap;
  j["iterations"] = r.iterations;
  j["z"] = vector_to_json(r.z);
  j["losses"] = vector_to_json(r.losses);
  j["rank"] = r.rank;
  j["fractional"] = r.fractional;
  j["certificate"] = to_string(r.certificate);
  j["status"] = to_string(r.status);
  if (r.weights.size()) j["weights"] = vector_to_json(r.weights);
  if (timing) j["wall_seconds"] = r.wall_seconds;
  return j;
}

inline json trace_to_json(const RoundingTrace& t) {
  json steps = json::array();
  for (const auto& s : t.steps)
    steps.push_back({{"block", s.block},
                     {"kernel_dim", s.kernel_dim},
                     {"direction_norm", s.direction_norm},
                     {"delta", s.delta},
                     {"pinned", s.pinned},
                     {"pinned_count", s.pinned_count},
                     {"residual", s.residual}});
  return {{"steps", steps}, {"final_rank", t.final_rank}, {"final_fractional", t.final_fractional}};
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError("'" + path + "' is not valid JSON: " + e.what());
  }
}

inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

/// n x d projection, one row per line, no header; shortest round-trip digits.
inline void write_projection_csv(std::ostream& out, const Matrix& p) {
  for (Eigen::Index r = 0; r < p.rows(); ++r) {
    for (Eigen::Index c = 0; c < p.cols(); ++c) {
      if (c) out << ',';
      out << format_double(p(r, c));
    }
    out << '\n';
  }
}

inline Matrix read_projection_csv(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    std::vector<double> row;
    for (const auto& cell : detail::split_csv_line(line)) {
      const auto v = detail::parse_real(cell);
      if (!v) throw ParseError("projection line " + std::to_string(line_no) + ": bad number '" + cell + "'");
      row.push_back(*v);
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw ParseError("projection line " + std::to_string(line_no) + ": ragged row");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("empty projection file");
  Matrix p(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c) p(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  return p;
}

}  // namespace mcdr::io
