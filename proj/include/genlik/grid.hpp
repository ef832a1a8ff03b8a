#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace genlik {

class FiniteJoint;

// Probability vector over the m observed values: either exact
// marginals or sample frequencies.
class ObservedMarginal {
 public:
  ObservedMarginal(std::vector<double> weights);

  int m() const { return static_cast<int>(w_.size()); }
  double operator()(int y) const { return w_[static_cast<std::size_t>(y)]; }
  const std::vector<double>& weights() const { return w_; }

  static ObservedMarginal uniform(int m);

 private:
  std::vector<double> w_;
};

// Dense n x m grid of joint probabilities p(x,y); x indexes the hidden
// variable (rows), y the observed one (columns). Entries are validated
// nonnegative and the total mass is held at 1: a drift of at most 1e-9
// is renormalized away, anything larger is rejected.
class FiniteJoint {
 public:
  FiniteJoint(int n, int m, std::vector<double> cells);

  int n() const { return n_; }
  int m() const { return m_; }
  double operator()(int x, int y) const {
    return p_[static_cast<std::size_t>(x) * m_ + y];
  }
  const std::vector<double>& cells() const { return p_; }

  std::vector<double> marginal_y() const;  // p(y) = sum_x p(x,y)
  std::vector<double> marginal_x() const;  // p(x) = sum_y p(x,y)

  static FiniteJoint uniform(int n, int m);

 private:
  int n_, m_;
  std::vector<double> p_;  // row-major
};

// --------- CSV serialization, header "x,y,p", 0-based indices ---------

void write_joint_csv(std::ostream& os, const FiniteJoint& joint);
void write_joint_csv_file(const std::string& path, const FiniteJoint& joint);
FiniteJoint read_joint_csv(std::istream& is);
FiniteJoint read_joint_csv_file(const std::string& path);

}  // namespace genlik
