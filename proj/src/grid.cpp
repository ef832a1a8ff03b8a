#include "genlik/grid.hpp"

#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "genlik/errors.hpp"
#include "genlik/io.hpp"

namespace genlik {

namespace {

constexpr double kNormTol = 1e-12;    // mass drift we keep as-is
constexpr double kRenormTol = 1e-9;   // mass drift we silently repair
constexpr double kNegativeTol = 1e-12;

// Shared validation for probability containers: clamp float dust at
// zero, renormalize small drift, reject anything worse.
void validate_and_normalize(std::vector<double>& v, const char* what) {
  double sum = 0.0;
  for (double& e : v) {
    if (std::isnan(e) || e < -kNegativeTol)
      throw InvalidDistribution(std::string(what) + ": negative entry");
    if (e < 0.0) e = 0.0;
    sum += e;
  }
  if (std::fabs(sum - 1.0) > kRenormTol)
    throw InvalidDistribution(std::string(what) + ": total mass " + fmt17(sum));
  if (std::fabs(sum - 1.0) > kNormTol)
    for (double& e : v) e /= sum;
}

}  // namespace

ObservedMarginal::ObservedMarginal(std::vector<double> weights)
    : w_(std::move(weights)) {
  if (w_.empty()) throw InvalidDistribution("ObservedMarginal: empty");
  validate_and_normalize(w_, "ObservedMarginal");
}

ObservedMarginal ObservedMarginal::uniform(int m) {
  return ObservedMarginal(std::vector<double>(static_cast<std::size_t>(m), 1.0 / m));
}

FiniteJoint::FiniteJoint(int n, int m, std::vector<double> cells)
    : n_(n), m_(m), p_(std::move(cells)) {
  if (n_ < 1 || m_ < 1) throw InvalidDistribution("FiniteJoint: empty grid");
  if (p_.size() != static_cast<std::size_t>(n_) * m_)
    throw DimensionMismatch("FiniteJoint: cell count does not match n*m");
  validate_and_normalize(p_, "FiniteJoint");
}

std::vector<double> FiniteJoint::marginal_y() const {
  std::vector<double> py(static_cast<std::size_t>(m_), 0.0);
  for (int x = 0; x < n_; ++x)
    for (int y = 0; y < m_; ++y) py[y] += (*this)(x, y);
  return py;
}

std::vector<double> FiniteJoint::marginal_x() const {
  std::vector<double> px(static_cast<std::size_t>(n_), 0.0);
  for (int x = 0; x < n_; ++x)
    for (int y = 0; y < m_; ++y) px[x] += (*this)(x, y);
  return px;
}

FiniteJoint FiniteJoint::uniform(int n, int m) {
  return FiniteJoint(
      n, m, std::vector<double>(static_cast<std::size_t>(n) * m, 1.0 / (n * m)));
}

// --------- CSV ---------

void write_joint_csv(std::ostream& os, const FiniteJoint& joint) {
  os << "x,y,p\n";
  for (int x = 0; x < joint.n(); ++x)
    for (int y = 0; y < joint.m(); ++y)
      os << x << ',' << y << ',' << fmt17(joint(x, y)) << '\n';
}

void write_joint_csv_file(const std::string& path, const FiniteJoint& joint) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open for writing: " + path);
  write_joint_csv(os, joint);
}

FiniteJoint read_joint_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("x,y,p", 0) != 0)
    throw Error("grid CSV: missing x,y,p header");
  struct Cell {
    int x, y;
    double p;
  };
  std::vector<Cell> cells;
  int nmax = -1, mmax = -1;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    Cell c{};
    char comma1 = 0, comma2 = 0;
    if (!(row >> c.x >> comma1 >> c.y >> comma2 >> c.p) || comma1 != ',' ||
        comma2 != ',')
      throw Error("grid CSV: bad row: " + line);
    if (c.x < 0 || c.y < 0) throw Error("grid CSV: negative index");
    nmax = std::max(nmax, c.x);
    mmax = std::max(mmax, c.y);
    cells.push_back(c);
  }
  if (cells.empty()) throw Error("grid CSV: no cells");
  const int n = nmax + 1, m = mmax + 1;
  std::vector<double> grid(static_cast<std::size_t>(n) * m, 0.0);
  std::vector<char> seen(grid.size(), 0);
  for (const Cell& c : cells) {
    const std::size_t idx = static_cast<std::size_t>(c.x) * m + c.y;
    if (seen[idx]) throw Error("grid CSV: duplicate cell");
    seen[idx] = 1;
    grid[idx] = c.p;
  }
  for (char s : seen)
    if (!s) throw Error("grid CSV: missing cell");
  return FiniteJoint(n, m, std::move(grid));
}

FiniteJoint read_joint_csv_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open: " + path);
  return read_joint_csv(is);
}

}  // namespace genlik
