#include "sdig/saga.hpp"

#include "sdig/error.hpp"

#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace sdig {

namespace {

constexpr const char* kTableHeader = "sdig-gradient-table,v1";

void write_row(std::ostream& out, const char* tag, const Eigen::Ref<const Eigen::RowVectorXd>& row) {
  out << tag;
  for (Eigen::Index j = 0; j < row.size(); ++j) out << ',' << row(j);
  out << '\n';
}

std::vector<std::string> read_fields(std::istream& in, const std::string& expected_tag) {
  std::string line;
  if (!std::getline(in, line)) fail(ErrorCode::io_error, "gradient table: truncated input");
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string f;
  while (std::getline(ss, f, ',')) fields.push_back(f);
  if (fields.empty() || fields.front() != expected_tag)
    fail(ErrorCode::io_error, "gradient table: expected '" + expected_tag + "' record");
  fields.erase(fields.begin());
  return fields;
}

void read_row(std::istream& in, const std::string& tag, Eigen::Ref<Eigen::RowVectorXd> row) {
  const auto fields = read_fields(in, tag);
  if (static_cast<Eigen::Index>(fields.size()) != row.size())
    fail(ErrorCode::io_error, "gradient table: wrong field count in '" + tag + "' record");
  for (Eigen::Index j = 0; j < row.size(); ++j) row(j) = std::stod(fields[j]);
}

}  // namespace

GradientTable GradientTable::init(const LocalObjective& lo, const ConstVecRef& x0,
                                  std::uint64_t seed, int agent_id, bool keep_points) {
  require(x0.size() == lo.dim(), "init_table: dimension mismatch");
  GradientTable t;
  t.agent_id_ = agent_id;
  t.grads_.resize(lo.q(), lo.dim());
  t.sum_ = Vec::Zero(lo.dim());
  t.fresh_.resize(lo.dim());
  t.stream_ = CounterStream(seed, static_cast<std::uint64_t>(agent_id));
  if (keep_points) t.points_ = x0.transpose().replicate(lo.q(), 1);
  for (int h = 0; h < lo.q(); ++h) {
    lo.component(h).gradient(x0, t.fresh_);
    t.grads_.row(h) = t.fresh_.transpose();
    t.sum_ += t.fresh_;
  }
  return t;
}

int GradientTable::draw_index() {
  return static_cast<int>(stream_.uniform_index(static_cast<std::uint64_t>(q())));
}

void GradientTable::stochastic_avg_gradient(const LocalObjective& lo, const ConstVecRef& x,
                                            int idx, VecRef g) {
  require(lo.q() == q() && lo.dim() == dim(), "stochastic_avg_gradient: table/objective mismatch");
  require(x.size() == dim() && g.size() == dim(), "stochastic_avg_gradient: dimension mismatch");
  require(idx >= 0 && idx < q(), "stochastic_avg_gradient: index out of range");

  lo.component(idx).gradient(x, fresh_);
  g = fresh_ - grads_.row(idx).transpose() + sum_ / q();

  sum_ += fresh_ - grads_.row(idx).transpose();
  grads_.row(idx) = fresh_.transpose();
  if (keeps_points()) points_.row(idx) = x.transpose();
}

Vec GradientTable::stochastic_avg_gradient(const LocalObjective& lo, const ConstVecRef& x,
                                           int idx) {
  Vec g(dim());
  stochastic_avg_gradient(lo, x, idx, g);
  return g;
}

void GradientTable::dump(std::ostream& out) const {
  const auto old = out.precision(17);
  out << kTableHeader << '\n';
  out << "meta," << agent_id_ << ',' << q() << ',' << dim() << ',' << stream_.key() << ','
      << stream_.counter() << ',' << (keeps_points() ? 1 : 0) << '\n';
  for (int h = 0; h < q(); ++h) write_row(out, "grad", grads_.row(h));
  write_row(out, "sum", sum_.transpose());
  if (keeps_points())
    for (int h = 0; h < q(); ++h) write_row(out, "point", points_.row(h));
  out.precision(old);
}

GradientTable GradientTable::restore(std::istream& in) {
  std::string header;
  if (!std::getline(in, header) || header != kTableHeader)
    fail(ErrorCode::io_error, "gradient table: unsupported header '" + header + "'");
  const auto meta = read_fields(in, "meta");
  if (meta.size() != 6) fail(ErrorCode::io_error, "gradient table: malformed meta record");
  GradientTable t;
  t.agent_id_ = std::stoi(meta[0]);
  const int q = std::stoi(meta[1]);
  const int n = std::stoi(meta[2]);
  if (q < 1 || n < 1) fail(ErrorCode::io_error, "gradient table: bad sizes");
  t.stream_.set_key(std::stoull(meta[3]));
  t.stream_.set_counter(std::stoull(meta[4]));
  const bool points = meta[5] == "1";
  t.grads_.resize(q, n);
  t.sum_.resize(n);
  t.fresh_.resize(n);
  for (int h = 0; h < q; ++h) read_row(in, "grad", t.grads_.row(h));
  Eigen::RowVectorXd sum(n);
  read_row(in, "sum", sum);
  t.sum_ = sum.transpose();
  if (points) {
    t.points_.resize(q, n);
    for (int h = 0; h < q; ++h) read_row(in, "point", t.points_.row(h));
  }
  return t;
}

}  // namespace sdig
