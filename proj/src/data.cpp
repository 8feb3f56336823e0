#include "rdcov/data.hpp"

#include "rdcov/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <unordered_map>

namespace rdcov {

namespace {

bool is_missing(std::string_view cell)
{
  return cell.empty() || cell == "NA" || cell == "NaN" || cell == "nan" || cell == "." ||
         cell == "NULL";
}

std::string_view trim(std::string_view s)
{
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

// Splits one CSV record. Double quotes group fields and "" escapes a quote.
std::vector<std::string> split_record(std::string_view line)
{
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.emplace_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.emplace_back(trim(cur));
  return out;
}

double parse_number(std::string_view cell, size_t row, const std::string& column)
{
  if (!cell.empty() && cell.front() == '+')
    cell.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(v)) {
    std::ostringstream msg;
    msg << "non-numeric value '" << cell << "' at row " << row << ", column '" << column << "'";
    throw ParseError(msg.str());
  }
  return v;
}

std::string format_double(double v)
{
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, ptr);
}

} // namespace

Dataset::Dataset(Eigen::VectorXd y,
                 Eigen::VectorXd x,
                 Eigen::MatrixXd z,
                 std::optional<std::vector<int>> cluster,
                 double cutoff)
  : y_(std::move(y))
  , x_(std::move(x))
  , z_(std::move(z))
  , cluster_(std::move(cluster))
  , cutoff_(cutoff)
{
  const auto n = y_.size();
  if (n == 0)
    throw EmptyDataError("dataset has no observations");
  if (x_.size() != n)
    throw ConfigError("score and outcome lengths differ");
  if (z_.cols() > 0 && z_.rows() != n)
    throw ConfigError("covariate matrix row count differs from outcome length");
  if (z_.cols() == 0)
    z_.resize(n, 0);
  if (!std::isfinite(cutoff_))
    throw ConfigError("cutoff must be finite");
  if (!y_.allFinite() || !x_.allFinite() || !z_.allFinite())
    throw ConfigError("dataset contains non-finite values");
  if (cluster_) {
    if (static_cast<Eigen::Index>(cluster_->size()) != n)
      throw ConfigError("cluster id vector length differs from outcome length");
    std::vector<int> ids = *cluster_;
    std::sort(ids.begin(), ids.end());
    n_clusters_ = static_cast<int>(std::unique(ids.begin(), ids.end()) - ids.begin());
  }
  n_right_ = (x_.array() >= 0.0).count();
  n_left_ = n - n_right_;
}

Dataset::Dataset(Eigen::VectorXd y, Eigen::VectorXd x)
  : Dataset(std::move(y), std::move(x), Eigen::MatrixXd(0, 0))
{}

void Dataset::require_two_sided() const
{
  if (one_sided()) {
    throw OneSidedError(n_left_ == 0 ? "no observations below the cutoff"
                                     : "no observations at or above the cutoff");
  }
}

Dataset Dataset::with_outcome(Eigen::VectorXd y) const
{
  return Dataset(std::move(y), x_, z_, cluster_, cutoff_);
}

Dataset Dataset::without_covariates() const
{
  return Dataset(y_, x_, Eigen::MatrixXd(n(), 0), cluster_, cutoff_);
}

Dataset Dataset::with_scaled_score(double c) const
{
  if (!(c > 0.0))
    throw DomainError("score scale factor must be positive");
  return Dataset(y_, x_ * c, z_, cluster_, cutoff_);
}

Dataset parse_csv(const std::string& text, const CsvSchema& schema, double cutoff)
{
  if (!std::isfinite(cutoff))
    throw ConfigError("cutoff must be finite");
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line))
    throw EmptyDataError("CSV input is empty");
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF)
    line.erase(0, 3); // UTF-8 byte order mark
  const auto header = split_record(line);

  auto column_index = [&](const std::string& name) -> size_t {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end())
      throw SchemaError("missing column '" + name + "'");
    return static_cast<size_t>(it - header.begin());
  };
  const size_t iy = column_index(schema.outcome);
  const size_t ix = column_index(schema.score);
  std::vector<size_t> iz;
  for (const auto& c : schema.covariates)
    iz.push_back(column_index(c));
  std::optional<size_t> ic;
  if (schema.cluster)
    ic = column_index(*schema.cluster);

  std::vector<double> ys, xs;
  std::vector<std::vector<double>> zs;
  std::vector<int> cl;
  std::unordered_map<std::string, int> cluster_ids;
  Eigen::Index dropped = 0;
  size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty())
      continue;
    const auto cells = split_record(line);
    auto cell = [&](size_t j) -> std::string_view {
      return j < cells.size() ? std::string_view(cells[j]) : std::string_view();
    };
    bool missing = is_missing(cell(iy)) || is_missing(cell(ix));
    for (size_t j : iz)
      missing = missing || is_missing(cell(j));
    if (ic)
      missing = missing || is_missing(cell(*ic));
    if (missing) {
      ++dropped;
      continue;
    }
    ys.push_back(parse_number(cell(iy), row, schema.outcome));
    xs.push_back(parse_number(cell(ix), row, schema.score) - cutoff);
    std::vector<double> zrow;
    for (size_t k = 0; k < iz.size(); ++k)
      zrow.push_back(parse_number(cell(iz[k]), row, schema.covariates[k]));
    zs.push_back(std::move(zrow));
    if (ic) {
      auto label = std::string(cell(*ic));
      auto [it, inserted] = cluster_ids.emplace(label, static_cast<int>(cluster_ids.size()));
      cl.push_back(it->second);
    }
  }
  if (ys.empty())
    throw EmptyDataError("no usable rows after dropping missing values");

  const auto n = static_cast<Eigen::Index>(ys.size());
  const auto d = static_cast<Eigen::Index>(iz.size());
  Eigen::MatrixXd z(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index k = 0; k < d; ++k)
      z(i, k) = zs[i][k];
  std::optional<std::vector<int>> cluster;
  if (ic)
    cluster = std::move(cl);
  Dataset out(Eigen::Map<Eigen::VectorXd>(ys.data(), n),
              Eigen::Map<Eigen::VectorXd>(xs.data(), n),
              std::move(z),
              std::move(cluster),
              cutoff);
  out.set_dropped_rows(dropped);
  return out;
}

Dataset load_csv(const std::string& path, const CsvSchema& schema, double cutoff)
{
  std::ifstream f(path, std::ios::binary);
  if (!f)
    throw ConfigError("cannot open '" + path + "'", "io");
  std::ostringstream buf;
  buf << f.rdbuf();
  return parse_csv(buf.str(), schema, cutoff);
}

std::string to_csv(const Dataset& data, const CsvSchema& schema)
{
  std::ostringstream out;
  const auto d = data.d();
  auto zname = [&](Eigen::Index k) {
    return k < static_cast<Eigen::Index>(schema.covariates.size()) ? schema.covariates[k]
                                                                    : "z" + std::to_string(k + 1);
  };
  out << (schema.outcome.empty() ? "y" : schema.outcome) << ','
      << (schema.score.empty() ? "x" : schema.score);
  for (Eigen::Index k = 0; k < d; ++k)
    out << ',' << zname(k);
  if (data.cluster())
    out << ',' << schema.cluster.value_or("cluster");
  out << '\n';
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    out << format_double(data.y()[i]) << ',' << format_double(data.x()[i] + data.cutoff());
    for (Eigen::Index k = 0; k < d; ++k)
      out << ',' << format_double(data.z()(i, k));
    if (data.cluster())
      out << ',' << (*data.cluster())[i];
    out << '\n';
  }
  return out.str();
}

void write_csv(const Dataset& data, const std::string& path, const CsvSchema& schema)
{
  std::ofstream f(path, std::ios::binary);
  if (!f)
    throw ConfigError("cannot write '" + path + "'", "io");
  f << to_csv(data, schema);
}

DiagnosticsReport validate(const Dataset& data)
{
  DiagnosticsReport r;
  r.n = data.n();
  r.n_left = data.n_left();
  r.n_right = data.n_right();
  r.d = data.d();
  r.x_min = data.x().minCoeff();
  r.x_max = data.x().maxCoeff();
  r.dropped_rows = data.dropped_rows();

  if (data.one_sided())
    r.warnings.push_back("one-sided data: estimators will refuse to run");
  if (r.n_left > 0 && r.n_left < kSmallSideThreshold)
    r.warnings.push_back("few observations below the cutoff (" + std::to_string(r.n_left) + ")");
  if (r.n_right > 0 && r.n_right < kSmallSideThreshold)
    r.warnings.push_back("few observations at or above the cutoff (" + std::to_string(r.n_right) +
                         ")");

  if (r.d > 0) {
    for (Eigen::Index k = 0; k < r.d; ++k) {
      const auto col = data.z().col(k);
      if (col.maxCoeff() == col.minCoeff())
        r.warnings.push_back("covariate " + std::to_string(k + 1) +
                             " collinear with intercept (constant column)");
    }
    Eigen::MatrixXd design(r.n, r.d + 1);
    design.col(0).setOnes();
    design.rightCols(r.d) = data.z();
    // Standardize columns so the rank threshold is scale-free.
    for (Eigen::Index k = 1; k <= r.d; ++k) {
      double mean = design.col(k).mean();
      double norm = (design.col(k).array() - mean).matrix().norm();
      if (norm > 0.0)
        design.col(k) = (design.col(k).array() - mean) / norm;
    }
    design.col(0) /= std::sqrt(static_cast<double>(r.n));
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    qr.setThreshold(1e-10);
    r.covariate_rank = qr.rank() - 1;
    if (r.covariate_rank < r.d)
      r.warnings.push_back("covariate columns are collinear (rank " +
                           std::to_string(r.covariate_rank) + " of " + std::to_string(r.d) + ")");
  }

  // Heuristic manipulation flag on the decile of scores nearest the cutoff.
  std::vector<Eigen::Index> order(static_cast<size_t>(r.n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  const auto& x = data.x();
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return std::abs(x[a]) < std::abs(x[b]);
  });
  const auto m = std::max<Eigen::Index>(1, r.n / 10);
  for (Eigen::Index j = 0; j < m; ++j)
    (x[order[j]] >= 0.0 ? r.near_right : r.near_left) += 1;
  if (!data.one_sided() && m >= 10) {
    double lo = static_cast<double>(std::min(r.near_left, r.near_right));
    double hi = static_cast<double>(std::max(r.near_left, r.near_right));
    if (lo == 0.0 || hi / lo > kDensityRatioThreshold)
      r.warnings.push_back("unbalanced counts near the cutoff (" + std::to_string(r.near_left) +
                           " left vs " + std::to_string(r.near_right) +
                           " right in the nearest decile): possible density gap");
  }
  return r;
}

} // namespace rdcov
