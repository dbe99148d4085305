#include "iirpl/cone_program.hpp"

#include <algorithm>
#include <iomanip>
#include <istream>
#include <ostream>
#include <string>

#include "iirpl/errors.hpp"

namespace iirpl {

namespace {

constexpr const char* kMagic = "iirpl-cone-program";

void write_row(std::ostream& os, const Eigen::Ref<const Eigen::RowVectorXd>& row, double tail) {
  for (Eigen::Index j = 0; j < row.size(); ++j) os << row[j] << ' ';
  os << tail << '\n';
}

class Reader {
 public:
  explicit Reader(std::istream& is) : is_(is) {}

  std::string word() {
    std::string w;
    if (!(is_ >> w)) fail("unexpected end of input");
    return w;
  }
  void expect(const std::string& w) {
    const std::string got = word();
    if (got != w) fail("expected '" + w + "', got '" + got + "'");
  }
  double number() {
    const std::string w = word();
    try {
      std::size_t used = 0;
      const double v = std::stod(w, &used);
      if (used != w.size()) fail("bad number '" + w + "'");
      return v;
    } catch (const std::invalid_argument&) {
      fail("bad number '" + w + "'");
    } catch (const std::out_of_range&) {
      fail("number out of range '" + w + "'");
    }
    return 0.0;
  }
  Eigen::Index count() {
    const double v = number();
    if (v < 0 || v != static_cast<double>(static_cast<Eigen::Index>(v))) fail("bad count");
    return static_cast<Eigen::Index>(v);
  }
  [[noreturn]] void fail(const std::string& msg) { throw Error(ErrorCode::ParseError, "cone program dump: " + msg); }

 private:
  std::istream& is_;
};

}  // namespace

void ConeProgram::validate() const {
  const Eigen::Index n = num_vars();
  if (lin_A.rows() != lin_b.size() || (lin_A.rows() > 0 && lin_A.cols() != n)) {
    throw Error(ErrorCode::DimensionMismatch, "linear rows do not match the variable count");
  }
  for (Eigen::Index i : pinned) {
    if (i < 0 || i >= n) throw Error(ErrorCode::DimensionMismatch, "pinned index out of range");
  }
  for (const SocBlock& b : soc) {
    if (b.A.rows() < 1) throw Error(ErrorCode::DimensionMismatch, "second-order cone block is empty");
    if (b.A.cols() != n || b.a.size() != b.A.rows() || b.c.size() != n) {
      throw Error(ErrorCode::DimensionMismatch, "second-order cone block does not match the variable count");
    }
  }
}

double ConeProgram::max_violation(const Eigen::VectorXd& u) const {
  double v = 0.0;
  for (Eigen::Index i : pinned) v = std::max(v, std::abs(u[i]));
  if (lin_A.rows() > 0) v = std::max(v, (lin_A * u - lin_b).maxCoeff());
  for (const SocBlock& b : soc) v = std::max(v, (b.A * u + b.a).norm() - b.c.dot(u) - b.c0);
  return v;
}

void write_program(std::ostream& os, const ConeProgram& p) {
  p.validate();
  const auto flags = os.flags();
  const auto prec = os.precision();
  os << std::setprecision(17);
  const Eigen::Index n = p.num_vars();
  os << kMagic << " 1\n";
  os << "vars " << n << '\n';
  os << "objective";
  for (Eigen::Index j = 0; j < n; ++j) os << ' ' << p.objective[j];
  os << "\npins " << p.pinned.size();
  for (Eigen::Index i : p.pinned) os << ' ' << i;
  os << "\nlinear " << p.num_linear() << '\n';
  for (Eigen::Index i = 0; i < p.num_linear(); ++i) write_row(os, p.lin_A.row(i), p.lin_b[i]);
  os << "soc " << p.soc.size() << '\n';
  for (const SocBlock& b : p.soc) {
    os << "block " << b.A.rows() << '\n';
    write_row(os, b.c.transpose(), b.c0);
    for (Eigen::Index i = 0; i < b.A.rows(); ++i) write_row(os, b.A.row(i), b.a[i]);
  }
  os.flags(flags);
  os.precision(prec);
}

ConeProgram read_program(std::istream& is) {
  Reader r(is);
  r.expect(kMagic);
  if (r.count() != 1) r.fail("unsupported version");
  r.expect("vars");
  const Eigen::Index n = r.count();
  ConeProgram p;
  r.expect("objective");
  p.objective.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) p.objective[j] = r.number();
  r.expect("pins");
  const Eigen::Index k = r.count();
  for (Eigen::Index i = 0; i < k; ++i) p.pinned.push_back(r.count());
  r.expect("linear");
  const Eigen::Index m = r.count();
  p.lin_A.resize(m, n);
  p.lin_b.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) p.lin_A(i, j) = r.number();
    p.lin_b[i] = r.number();
  }
  r.expect("soc");
  const Eigen::Index nb = r.count();
  for (Eigen::Index b = 0; b < nb; ++b) {
    r.expect("block");
    const Eigen::Index d = r.count();
    SocBlock blk;
    blk.c.resize(n);
    for (Eigen::Index j = 0; j < n; ++j) blk.c[j] = r.number();
    blk.c0 = r.number();
    blk.A.resize(d, n);
    blk.a.resize(d);
    for (Eigen::Index i = 0; i < d; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) blk.A(i, j) = r.number();
      blk.a[i] = r.number();
    }
    p.soc.push_back(std::move(blk));
  }
  p.validate();
  return p;
}

}  // namespace iirpl
