#pragma once

#include <optional>
#include <vector>

#include "genlik/grid.hpp"

namespace genlik {

// ===== binary hidden/observed pair =====
//
// p(x,y) = exp(g x + h x y) / (4 cosh h cosh g) on x,y in {-1,+1};
// the observed marginal depends on (g,h) only through z = tanh h tanh g.
// Grid index 0 maps to the value -1, index 1 to +1.

FiniteJoint discrete_joint(double g, double h);
double discrete_z(double g, double h);
ObservedMarginal discrete_marginal(double z);  // ((1-z)/2, (1+z)/2)

// L_beta(ghat, hhat) with the model constants dropped; symmetric under
// ghat <-> hhat. Differs from the generic evaluator on discrete_joint by
// exactly ln 4 - (ln 2)/beta.
double discrete_lbeta(double g_hat, double h_hat, double z, double beta);

enum class DiscreteSolutionKind {
  kZero,                // (0,0): the only stationary point when (1+z)beta <= 1
  kSymmetricRoot,       // beta < 1: ghat = hhat solving the gap equation
  kDegenerateManifold,  // beta = 1: any (ghat, hhat) with tanh ghat tanh hhat = z
  kDivergedPair,        // beta > 1: (inf, arctanh z) and its swap
};

struct DiscreteSolution {
  DiscreteSolutionKind kind;
  double beta, z;
  double g_hat = 0.0, h_hat = 0.0;  // finite coordinates; see diverged flags
  bool g_diverged = false;          // the paired solution swaps the flags
  bool h_diverged = false;
  double residual = 0.0;            // |(1+z)/2 tanh(2 beta g) - tanh g| at the root
};

DiscreteSolution discrete_solve(double z, double beta);

// Average decision overlap of the estimate (ghat,hhat) against data at
// mixing level z; diverged coordinates saturate the corresponding tanh.
double discrete_overlap(double z, double g_hat, double h_hat,
                        bool g_diverged = false, bool h_diverged = false);

// ===== nonnegative continuous pair =====
//
// p(x,y) = g e^{-gx} h x e^{-hxy}; the observed marginal depends only on
// chi = g/h. L_beta separates into a chi_hat part and a (1-1/beta) ln hhat
// part, so the hhat direction of ascent is fixed by the sign of beta-1.

double continuous_lbeta(double g_hat, double h_hat, double chi_true,
                        double beta);

enum class ContinuousStatus {
  kUniqueAtBetaOne,  // chihat = chi, any hhat
  kDivergesSmallH,   // no cap binds: L grows as hhat -> 0
  kDivergesLargeH,   // no maximum: L grows as hhat -> infinity
  kCapped,           // cap binds: hhat = H, chihat = argmax
  kNotSensible,      // cap present but does not bind (hhat -> 0 anyway)
};

struct ContinuousSolution {
  ContinuousStatus status;
  double beta, chi;
  double chi_hat;                // argmax over chihat; equals chi at beta = 1
  std::optional<double> h_hat;   // set when the cap pins hhat
};

ContinuousSolution continuous_solve(double chi, double beta,
                                    std::optional<double> cap = std::nullopt);

// ===== maximin estimator demonstration =====
//
// Worst-case Hellinger profiles for the binary model in the
// (utilde, vtilde) estimator coordinates. Both criteria collapse to
// degenerate estimator sets, which is the point of the demo.

struct MaximinReport {
  // branch structure of the per-observation u-profile
  double crossover_u;        // -ln(sqrt(2)-1)
  double crossover_gap;      // |branch difference| at the crossover
  // per-observation criterion
  double v_argmax;           // 0
  double u_branch_low_argmax;   // 0 (descending branch)
  bool u_branch_high_diverges;  // ascending branch pushes utilde -> infinity
  // averaged criterion, minimized on a (u, v<=|20|) grid
  double avg_match_worst_err;   // |grid minimum - closed form| over estimators
  double avg_v_argmax;          // 0
  double avg_u_spread;          // value spread across utilde: ~0, u undetermined
};

MaximinReport maximin_demo();

}  // namespace genlik
