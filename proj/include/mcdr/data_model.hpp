#pragma once

#include "mcdr/error.hpp"
#include "mcdr/linalg.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace mcdr {

struct Group {
  std::string label;
  Matrix rows;     // m_i x n
  Vector weights;  // empty means every row has weight 1
};

/// Data partitioned (or reweighted) into groups sharing one ambient dimension.
struct GroupedDataset {
  Eigen::Index n = 0;
  std::vector<Group> groups;
  std::vector<std::string> feature_names;
  std::vector<std::string> unscaled_columns;  // zero-variance columns skipped by --scale
  std::size_t dropped_rows = 0;

  std::size_t k() const { return groups.size(); }

  void validate() const {
    if (groups.empty()) throw InvariantError("dataset has no groups");
    for (const auto& g : groups) {
      if (g.rows.cols() != n)
        throw InvariantError("group '" + g.label + "' has dimension " +
                             std::to_string(g.rows.cols()) + ", expected " + std::to_string(n));
      if (g.rows.rows() < 1) throw InvariantError("group '" + g.label + "' is empty");
      if (g.weights.size() != 0) {
        if (g.weights.size() != g.rows.rows())
          throw InvariantError("group '" + g.label + "' weight count mismatch");
        if ((g.weights.array() < 0).any() || !g.weights.allFinite())
          throw InvariantError("group '" + g.label + "' has a negative or non-finite weight");
        if (!(g.weights.array() > 0).any())
          throw InvariantError("group '" + g.label + "' has no positive weight");
      }
    }
  }
};

/// Per-group PSD matrices B_i with sizes, traces and normalization factors.
struct CovarianceSet {
  std::vector<std::string> labels;
  std::vector<Matrix> B;
  std::vector<double> m;      // group size (sum of row weights)
  std::vector<double> trace;  // tr(B_i)
  std::vector<double> scale;  // c_i with B_i = c_i * A_i^T W_i A_i
  std::optional<std::vector<double>> beta;

  std::size_t k() const { return B.size(); }
  Eigen::Index n() const { return B.empty() ? 0 : B.front().rows(); }

  double max_trace() const {
    return trace.empty() ? 0.0 : *std::max_element(trace.begin(), trace.end());
  }

  /// Build from explicit matrices; checks symmetry and clamps round-off
  /// negativity (eigenvalues >= -1e-8 tr(B_i)) to PSD.
  static CovarianceSet from_matrices(std::vector<Matrix> mats,
                                     std::vector<std::string> labels = {}) {
    CovarianceSet cs;
    if (mats.empty()) throw InvariantError("covariance set needs at least one matrix");
    const Eigen::Index n = mats.front().rows();
    for (std::size_t i = 0; i < mats.size(); ++i) {
      if (mats[i].rows() != n || mats[i].cols() != n)
        throw InvariantError("covariance " + std::to_string(i) + " is not " + std::to_string(n) +
                             "x" + std::to_string(n));
      cs.B.push_back(check_and_clamp(mats[i], i));
      cs.m.push_back(1.0);
      cs.scale.push_back(1.0);
      cs.trace.push_back(cs.B.back().trace());
      cs.labels.push_back(i < labels.size() ? labels[i] : "g" + std::to_string(i + 1));
    }
    return cs;
  }

  static Matrix check_and_clamp(const Matrix& b, std::size_t index) {
    if (!b.allFinite()) throw InvariantError("covariance " + std::to_string(index) + " is not finite");
    if (!is_symmetric(b, 1e-10))
      throw InvariantError("covariance " + std::to_string(index) + " is not symmetric");
    Matrix sym = symmetrize(b);
    const double tr = std::max(sym.trace(), 0.0);
    const SymEigen eig = sym_eig(sym);
    const double smallest = eig.values.size() ? eig.values.minCoeff() : 0.0;
    if (smallest >= 0.0) return sym;
    if (smallest < -1e-8 * tr)
      throw InvariantError("covariance " + std::to_string(index) +
                           " is not PSD (smallest eigenvalue " + std::to_string(smallest) + ")");
    return compose(eig.vectors, eig.values.cwiseMax(0.0));
  }
};

struct IngestOptions {
  bool center = false;
  bool scale = false;
  bool drop_missing = false;
};

namespace detail {

inline std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cell.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cell.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.push_back(std::move(cell));
      cell.clear();
    } else {
      cell.push_back(ch);
    }
  }
  out.push_back(std::move(cell));
  return out;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::optional<double> parse_real(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(value)) return std::nullopt;
  return value;
}

}  // namespace detail

/// Parse a comma-separated table with a header row. Rows are grouped by the
/// label in `group_column` in order of first appearance; every other column
/// must be numeric.
inline GroupedDataset ingest_csv(std::istream& in, const std::string& group_column,
                                 const IngestOptions& opts = {}) {
  std::string line;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    if (!detail::trim(line).empty()) {
      header = detail::split_csv_line(line);
      break;
    }
  }
  if (header.empty()) throw ParseError("empty CSV input");
  for (auto& h : header) h = std::string(detail::trim(h));

  const auto it = std::find(header.begin(), header.end(), group_column);
  if (it == header.end()) throw ParseError("group column '" + group_column + "' not found");
  const std::size_t group_idx = static_cast<std::size_t>(it - header.begin());

  GroupedDataset ds;
  for (std::size_t c = 0; c < header.size(); ++c)
    if (c != group_idx) ds.feature_names.push_back(header[c]);
  const std::size_t n = ds.feature_names.size();
  if (n == 0) throw ParseError("no feature columns besides the group column");
  ds.n = static_cast<Eigen::Index>(n);

  std::vector<std::vector<double>> values;
  std::vector<std::size_t> row_group;
  std::vector<std::string> labels;
  std::unordered_map<std::string, std::size_t> label_index;

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != header.size()) {
      if (opts.drop_missing) {
        ++ds.dropped_rows;
        continue;
      }
      throw ParseError("line " + std::to_string(line_no) + ": expected " +
                       std::to_string(header.size()) + " cells, got " + std::to_string(cells.size()));
    }
    std::vector<double> row;
    row.reserve(n);
    bool ok = true;
    for (std::size_t c = 0; c < cells.size() && ok; ++c) {
      if (c == group_idx) continue;
      const auto v = detail::parse_real(cells[c]);
      if (!v) {
        if (!opts.drop_missing)
          throw ParseError("line " + std::to_string(line_no) + ": non-numeric cell '" + cells[c] +
                           "' in column '" + header[c] + "'");
        ok = false;
      } else {
        row.push_back(*v);
      }
    }
    const std::string label(detail::trim(cells[group_idx]));
    if (ok && label.empty()) {
      if (!opts.drop_missing)
        throw ParseError("line " + std::to_string(line_no) + ": empty group label");
      ok = false;
    }
    if (!ok) {
      ++ds.dropped_rows;
      continue;
    }
    auto [pos, inserted] = label_index.emplace(label, labels.size());
    if (inserted) labels.push_back(label);
    row_group.push_back(pos->second);
    values.push_back(std::move(row));
  }
  if (values.empty()) throw ParseError("no data rows (after dropping)");

  const std::size_t total = values.size();
  Matrix all(static_cast<Eigen::Index>(total), ds.n);
  for (std::size_t r = 0; r < total; ++r)
    for (std::size_t c = 0; c < n; ++c) all(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = values[r][c];

  if (opts.center || opts.scale) {
    const Vector mean = all.colwise().mean();
    if (opts.center) all.rowwise() -= mean.transpose();
    if (opts.scale) {
      for (Eigen::Index c = 0; c < ds.n; ++c) {
        const double var = (all.col(c).array() - all.col(c).mean()).square().mean();
        if (var <= 0.0) {
          ds.unscaled_columns.push_back(ds.feature_names[static_cast<std::size_t>(c)]);
          continue;
        }
        all.col(c) /= std::sqrt(var);
      }
    }
  }

  std::vector<std::vector<Eigen::Index>> members(labels.size());
  for (std::size_t r = 0; r < total; ++r) members[row_group[r]].push_back(static_cast<Eigen::Index>(r));
  for (std::size_t g = 0; g < labels.size(); ++g) {
    Group grp;
    grp.label = labels[g];
    grp.rows.resize(static_cast<Eigen::Index>(members[g].size()), ds.n);
    for (std::size_t r = 0; r < members[g].size(); ++r)
      grp.rows.row(static_cast<Eigen::Index>(r)) = all.row(members[g][r]);
    ds.groups.push_back(std::move(grp));
  }
  ds.validate();
  return ds;
}

inline GroupedDataset ingest_csv(const std::string& path, const std::string& group_column,
                                 const IngestOptions& opts = {}) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  return ingest_csv(in, group_column, opts);
}

/// B_i = c_i * sum_r w_r a_r a_r^T with c_i = group_weight_i / m_i when
/// normalizing (m_i = sum of row weights) and c_i = group_weight_i otherwise.
///
/// Rows are accumulated in lexicographic order, so the result is bitwise
/// independent of the input row order.
inline CovarianceSet covariances(const GroupedDataset& ds, bool normalize = true,
                                 const std::vector<double>& group_weights = {}) {
  ds.validate();
  if (!group_weights.empty() && group_weights.size() != ds.k())
    throw ParameterError("group weight count does not match group count");
  CovarianceSet cs;
  const Eigen::Index n = ds.n;
  for (std::size_t gi = 0; gi < ds.k(); ++gi) {
    const Group& g = ds.groups[gi];
    const Eigen::Index rows = g.rows.rows();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(rows));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
      for (Eigen::Index c = 0; c < n; ++c) {
        if (g.rows(a, c) != g.rows(b, c)) return g.rows(a, c) < g.rows(b, c);
      }
      const double wa = g.weights.size() ? g.weights[a] : 1.0;
      const double wb = g.weights.size() ? g.weights[b] : 1.0;
      return wa < wb;
    });

    Matrix gram = Matrix::Zero(n, n);
    double mass = 0.0;
    for (const Eigen::Index r : order) {
      const double w = g.weights.size() ? g.weights[r] : 1.0;
      mass += w;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double wi = w * g.rows(r, i);
        for (Eigen::Index j = 0; j <= i; ++j) gram(i, j) += wi * g.rows(r, j);
      }
    }
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i + 1; j < n; ++j) gram(i, j) = gram(j, i);

    const double gw = group_weights.empty() ? 1.0 : group_weights[gi];
    if (!(gw > 0.0)) throw ParameterError("group weights must be positive");
    const double c = normalize ? gw / mass : gw;
    Matrix b = c * gram;
    cs.B.push_back(CovarianceSet::check_and_clamp(b, gi));
    cs.labels.push_back(g.label);
    cs.m.push_back(mass);
    cs.scale.push_back(c);
    cs.trace.push_back(cs.B.back().trace());
  }
  return cs;
}

}  // namespace mcdr
