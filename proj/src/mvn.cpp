#include "mixstdf/mvn.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

namespace mixstdf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

constexpr std::array<int, 30> kPrimes = {2,  3,  5,  7,  11, 13, 17, 19, 23,  29,  31,  37,  41,  43,  47,
                                         53, 59, 61, 67, 71, 73, 79, 83, 89, 97, 101, 103, 107, 109, 113};

// Hart's rational approximation; absolute error below 1e-15, one exp per call.
double normal_cdf_fast(double z) {
  const double a = std::abs(z);
  if (a > 37.0) return z > 0.0 ? 1.0 : 0.0;
  const double e = std::exp(-0.5 * a * a);
  double p;
  if (a < 7.071067811865475) {
    p = e *
        ((((((0.03526249659989109 * a + 0.7003830644436881) * a + 6.373962203531650) * a + 33.91286607838300) * a +
           112.0792914978709) *
              a +
          221.2135961699311) *
             a +
         220.2068679123761) /
        (((((((0.08838834764831844 * a + 1.755667163182642) * a + 16.06417757920695) * a + 86.78073220294608) * a +
            296.5642487796737) *
               a +
           637.3336333788311) *
              a +
          793.8265125199484) *
             a +
         440.4137358247522);
  } else {
    p = e / (a + 1.0 / (a + 2.0 / (a + 3.0 / (a + 4.0 / (a + 0.65))))) / 2.506628274631001;
  }
  return z > 0.0 ? 1.0 - p : p;
}

// Upper-orthant probability P(X > dh, Y > dk), Genz's BVNU.
double bvnu(double dh, double dk, double r) {
  if (dh == kInf || dk == kInf) return 0.0;
  if (dh == -kInf) return dk == -kInf ? 1.0 : normal_cdf(-dk);
  if (dk == -kInf) return normal_cdf(-dh);
  if (r == 0.0) return normal_cdf(-dh) * normal_cdf(-dk);

  static constexpr std::array<double, 3> w6 = {0.1713244923791705, 0.3607615730481384, 0.4679139345726904};
  static constexpr std::array<double, 3> x6 = {0.9324695142031522, 0.6612093864662647, 0.2386191860831970};
  static constexpr std::array<double, 6> w12 = {.04717533638651177, 0.1069393259953183, 0.1600783285433464,
                                                0.2031674267230659, 0.2334925365383547, 0.2491470458134029};
  static constexpr std::array<double, 6> x12 = {0.9815606342467191, 0.9041172563704750, 0.7699026741943050,
                                                0.5873179542866171, 0.3678314989981802, 0.1252334085114692};
  static constexpr std::array<double, 10> w20 = {.01761400713915212, .04060142980038694, .06267204833410906,
                                                 .08327674157670475, 0.1019301198172404, 0.1181945319615184,
                                                 0.1316886384491766, 0.1420961093183821, 0.1491729864726037,
                                                 0.1527533871307259};
  static constexpr std::array<double, 10> x20 = {0.9931285991850949, 0.9639719272779138, 0.9122344282513259,
                                                 0.8391169718222188, 0.7463319064601508, 0.6360536807265150,
                                                 0.5108670019508271, 0.3737060887154196, 0.2277858511416451,
                                                 0.07652652113349733};

  const double* wp;
  const double* xp;
  int lg;
  const double ar = std::abs(r);
  if (ar < 0.3) {
    wp = w6.data(), xp = x6.data(), lg = 3;
  } else if (ar < 0.75) {
    wp = w12.data(), xp = x12.data(), lg = 6;
  } else {
    wp = w20.data(), xp = x20.data(), lg = 10;
  }
  // Symmetrised nodes 1 - x and 1 + x on [0, 2], each with weight w.
  std::array<double, 20> w{}, x{};
  for (int i = 0; i < lg; ++i) {
    w[i] = w[i + lg] = wp[i];
    x[i] = 1.0 - xp[i];
    x[i + lg] = 1.0 + xp[i];
  }
  const int npts = 2 * lg;

  const double tp = 2.0 * std::numbers::pi;
  double h = dh, k = dk, hk = h * k;
  double bvn = 0.0;
  if (ar < 0.925) {
    const double hs = (h * h + k * k) / 2.0;
    const double asr = std::asin(r) / 2.0;
    for (int i = 0; i < npts; ++i) {
      const double sn = std::sin(asr * x[i]);
      bvn += w[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
    }
    bvn = bvn * asr / tp + normal_cdf(-h) * normal_cdf(-k);
  } else {
    if (r < 0.0) {
      k = -k;
      hk = -hk;
    }
    if (ar < 1.0) {
      const double as = 1.0 - r * r;
      double a = std::sqrt(as);
      const double bs = (h - k) * (h - k);
      double asr = -(bs / as + hk) / 2.0;
      const double c = (4.0 - hk) / 8.0;
      const double d = (12.0 - hk) / 80.0;
      if (asr > -100.0) bvn = a * std::exp(asr) * (1.0 - c * (bs - as) * (1.0 - d * bs) / 3.0 + c * d * as * as);
      if (hk > -100.0) {
        const double b = std::sqrt(bs);
        const double sp = std::sqrt(tp) * normal_cdf(-b / a);
        bvn -= std::exp(-hk / 2.0) * sp * b * (1.0 - c * bs * (1.0 - d * bs) / 3.0);
      }
      a /= 2.0;
      double acc = 0.0;
      for (int i = 0; i < npts; ++i) {
        const double xs = (a * x[i]) * (a * x[i]);
        const double asri = -(bs / xs + hk) / 2.0;
        if (asri <= -100.0) continue;
        const double sp = 1.0 + c * xs * (1.0 + 5.0 * d * xs);
        const double rs = std::sqrt(1.0 - xs);
        const double ep = std::exp(-(hk / 2.0) * xs / ((1.0 + rs) * (1.0 + rs))) / rs;
        acc += std::exp(asri) * (sp - ep) * w[i];
      }
      bvn = (a * acc - bvn) / tp;
    }
    if (r > 0.0) {
      bvn += normal_cdf(-std::max(h, k));
    } else if (h >= k) {
      bvn = -bvn;
    } else {
      const double L = h < 0.0 ? normal_cdf(k) - normal_cdf(h) : normal_cdf(-h) - normal_cdf(-k);
      bvn = L - bvn;
    }
  }
  return std::clamp(bvn, 0.0, 1.0);
}

double truncated_mean_below(double b) {
  // E[Y | Y <= b] for standard normal Y.
  if (b == kInf) return 0.0;
  const double cdf = normal_cdf(b);
  if (cdf <= 0.0) return b;
  const double pdf = std::exp(-0.5 * b * b) / std::sqrt(2.0 * std::numbers::pi);
  return -pdf / cdf;
}

}  // namespace

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_quantile(double p) {
  if (std::isnan(p) || p < 0.0 || p > 1.0) throw std::domain_error("normal_quantile: p outside [0,1]");
  if (p == 0.0) return -kInf;
  if (p == 1.0) return kInf;
  const double q = p - 0.5;
  double val;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    val = q *
          (((((((r * 2509.0809287301226727 + 33430.575583588128105) * r + 67265.770927008700853) * r +
               45921.953931549871457) *
                  r +
              13731.693765509461125) *
                 r +
             1971.5909503065514427) *
                r +
            133.14166789178437745) *
               r +
           3.387132872796366608) /
          (((((((r * 5226.495278852545925 + 28729.085735721942674) * r + 39307.89580009271061) * r +
               21213.794301586595867) *
                  r +
              5394.1960214247511077) *
                 r +
             687.1870074920579083) *
                r +
            42.313330701600911252) *
               r +
           1.0);
    return val;
  }
  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  if (r <= 5.0) {
    r -= 1.6;
    val = (((((((r * 7.7454501427834140764e-4 + .0227238449892691845833) * r + .24178072517745061177) * r +
               1.27045825245236838258) *
                  r +
              3.64784832476320460504) *
                 r +
             5.7694972214606914055) *
                r +
            4.6303378461565452959) *
               r +
           1.42343711074968357734) /
          (((((((r * 1.05075007164441684324e-9 + 5.475938084995344946e-4) * r + .0151986665636164571966) * r +
               .14810397642748007459) *
                  r +
              .68976733498510000455) *
                 r +
             1.6763848301838038494) *
                r +
            2.05319162663775882187) *
               r +
           1.0);
  } else {
    r -= 5.0;
    val = (((((((r * 2.01033439929228813265e-7 + 2.71155556874348757815e-5) * r + .0012426609473880784386) * r +
               .026532189526576123093) *
                  r +
              .29656057182850489123) *
                 r +
             1.7848265399172913358) *
                r +
            5.4637849111641143699) *
               r +
           6.6579046435011037772) /
          (((((((r * 2.04426310338993978564e-15 + 1.4215117583164458887e-7) * r + 1.8463183175100546818e-5) * r +
               7.868691311456132591e-4) *
                  r +
              .0148753612908506148525) *
                 r +
             .13692988092273580531) *
                r +
            .59983220655588793769) *
               r +
           1.0);
  }
  return q < 0.0 ? -val : val;
}

double bivariate_normal_cdf(double h, double k, double rho) {
  if (!(rho > -1.0 && rho < 1.0)) throw std::domain_error("bivariate_normal_cdf: |rho| must be < 1");
  return bvnu(-h, -k, rho);
}

ReorderedCholesky cholesky_reordered(const Eigen::MatrixXd& sigma, const Eigen::VectorXd& upper) {
  const Eigen::Index m = sigma.rows();
  if (sigma.cols() != m || upper.size() != m) throw std::invalid_argument("cholesky_reordered: shape mismatch");
  if (!sigma.isApprox(sigma.transpose(), 1e-12)) throw std::domain_error("cholesky_reordered: Sigma not symmetric");

  Eigen::MatrixXd S = sigma;
  Eigen::VectorXd b = upper;
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(m, m);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) order[static_cast<std::size_t>(i)] = i;
  Eigen::VectorXd y = Eigen::VectorXd::Zero(m);
  const double scale = std::max(1.0, S.diagonal().cwiseAbs().maxCoeff());

  for (Eigen::Index i = 0; i < m; ++i) {
    Eigen::Index best = -1;
    double bestProb = kInf;
    for (Eigen::Index j = i; j < m; ++j) {
      const double var = S(j, j) - L.row(j).head(i).squaredNorm();
      if (var <= 1e-13 * scale) continue;
      const double sd = std::sqrt(var);
      const double shifted = (b(j) - L.row(j).head(i).dot(y.head(i))) / sd;
      const double prob = normal_cdf(shifted);
      if (prob < bestProb) {
        bestProb = prob;
        best = j;
      }
    }
    if (best < 0) throw std::domain_error("cholesky_reordered: Sigma is not positive definite");
    if (best != i) {
      S.row(i).swap(S.row(best));
      S.col(i).swap(S.col(best));
      L.row(i).swap(L.row(best));
      std::swap(b(i), b(best));
      std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(best)]);
    }
    const double lii = std::sqrt(S(i, i) - L.row(i).head(i).squaredNorm());
    L(i, i) = lii;
    for (Eigen::Index j = i + 1; j < m; ++j) L(j, i) = (S(j, i) - L.row(j).head(i).dot(L.row(i).head(i))) / lii;
    y(i) = truncated_mean_below((b(i) - L.row(i).head(i).dot(y.head(i))) / lii);
  }
  return {std::move(L), std::move(order), std::move(b)};
}

MvnResult mvn_cdf(const Eigen::VectorXd& upper, const Eigen::MatrixXd& sigma, const MvnOptions& opts) {
  const Eigen::Index m0 = upper.size();
  if (sigma.rows() != m0 || sigma.cols() != m0) throw std::invalid_argument("mvn_cdf: shape mismatch");
  if (!(opts.accuracy > 0.0)) throw std::invalid_argument("mvn_cdf: accuracy must be positive");

  std::vector<Eigen::Index> keep;
  bool anyNegInf = false;
  for (Eigen::Index i = 0; i < m0; ++i) {
    if (std::isnan(upper(i))) throw std::invalid_argument("mvn_cdf: NaN limit");
    if (upper(i) == kInf) continue;
    if (upper(i) == -kInf) anyNegInf = true;
    keep.push_back(i);
  }
  const auto m = static_cast<Eigen::Index>(keep.size());
  Eigen::VectorXd b(m);
  Eigen::MatrixXd S(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    b(i) = upper(keep[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < m; ++j) S(i, j) = sigma(keep[static_cast<std::size_t>(i)], keep[static_cast<std::size_t>(j)]);
  }
  if (m == 0) return {1.0, 0.0, true};

  // Positive definiteness is checked even when the answer is trivially 0.
  ReorderedCholesky chol = cholesky_reordered(S, b);
  if (anyNegInf) return {0.0, 0.0, true};

  if (m == 1) return {normal_cdf(b(0) / std::sqrt(S(0, 0))), 0.0, true};
  if (m == 2) {
    const double s1 = std::sqrt(S(0, 0)), s2 = std::sqrt(S(1, 1));
    const double rho = std::clamp(S(0, 1) / (s1 * s2), -1.0, 1.0);
    if (std::abs(rho) >= 1.0) throw std::domain_error("mvn_cdf: Sigma is not positive definite");
    return {bivariate_normal_cdf(b(0) / s1, b(1) / s2, rho), 0.0, true};
  }

  const Eigen::MatrixXd& L = chol.L;
  const Eigen::VectorXd& bb = chol.upper;
  const Eigen::Index dims = m - 1;
  if (dims >= static_cast<Eigen::Index>(kPrimes.size())) throw std::invalid_argument("mvn_cdf: dimension too large");

  Eigen::VectorXd gen(dims);
  for (Eigen::Index i = 0; i < dims; ++i) {
    const double s = std::sqrt(static_cast<double>(kPrimes[static_cast<std::size_t>(i)]));
    gen(i) = s - std::floor(s);
  }

  const int R = std::max(2, opts.randomizations);
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<Eigen::VectorXd> shifts(static_cast<std::size_t>(R), Eigen::VectorXd(dims));
  for (auto& sh : shifts)
    for (Eigen::Index i = 0; i < dims; ++i) sh(i) = unif(rng);

  const double e0 = normal_cdf(bb(0) / L(0, 0));
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> Lr = L;
  const Eigen::VectorXd invDiag = L.diagonal().cwiseInverse();
  std::vector<double> y(static_cast<std::size_t>(dims));
  auto integrand = [&](const double* w) {
    double e = e0;
    double f = e0;
    for (Eigen::Index i = 1; i < m && f > 0.0; ++i) {
      const double u = std::clamp(w[i - 1] * e, 1e-300, 1.0 - 1e-16);
      y[static_cast<std::size_t>(i - 1)] = normal_quantile(u);
      const double* row = Lr.data() + i * m;
      double s = 0.0;
      for (Eigen::Index k = 0; k < i; ++k) s += row[k] * y[static_cast<std::size_t>(k)];
      e = normal_cdf_fast((bb(i) - s) * invDiag(i));
      f *= e;
    }
    return f;
  };

  std::vector<double> sums(static_cast<std::size_t>(R), 0.0);
  std::vector<double> w(static_cast<std::size_t>(dims));
  long done = 0;
  long target = std::max(16, opts.initialPoints);
  MvnResult result;
  for (;;) {
    for (int rr = 0; rr < R; ++rr) {
      const auto& sh = shifts[static_cast<std::size_t>(rr)];
      double acc = 0.0;
      for (long kk = done + 1; kk <= target; ++kk) {
        for (Eigen::Index i = 0; i < dims; ++i) {
          double u = static_cast<double>(kk) * gen(i) + sh(i);
          u -= std::floor(u);
          w[static_cast<std::size_t>(i)] = 1.0 - std::abs(2.0 * u - 1.0);
        }
        acc += integrand(w.data());
      }
      sums[static_cast<std::size_t>(rr)] += acc;
    }
    done = target;
    double mean = 0.0;
    for (double s : sums) mean += s / static_cast<double>(done);
    mean /= R;
    double var = 0.0;
    for (double s : sums) {
      const double dv = s / static_cast<double>(done) - mean;
      var += dv * dv;
    }
    var /= static_cast<double>(R - 1);
    result.value = std::clamp(mean, 0.0, 1.0);
    result.error = 3.0 * std::sqrt(var / R);
    if (result.error <= opts.accuracy) {
      result.converged = true;
      break;
    }
    if (target * 2 > opts.maxPoints) {
      result.converged = false;
      break;
    }
    target *= 2;
  }
  return result;
}

}  // namespace mixstdf
