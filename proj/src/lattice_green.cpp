#include "lifshitz/lattice_green.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <mutex>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <fftw3.h>
#include <fmt/format.h>
#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>
#include <gsl/gsl_sf_bessel.h>
#include "json.hpp"

#include "lifshitz/dispersion.hpp"
#include "lifshitz/error.hpp"
#include "lifshitz/stats.hpp"

namespace lifshitz {

namespace {

constexpr double kPi = std::numbers::pi;

struct BesselParams {
  int n[3];
  double estar;
};

double bessel_integrand(double t, void* data) {
  auto* p = static_cast<BesselParams*>(data);
  double v = std::exp(-p->estar * t);
  for (int a = 0; a < 3; ++a) {
    v *= p->n[a] == 0 ? gsl_sf_bessel_I0_scaled(t) : gsl_sf_bessel_In_scaled(p->n[a], t);
    if (v == 0.0) return 0.0;
  }
  return v;
}

void quiet_gsl() {
  static std::once_flag once;
  std::call_once(once, [] { gsl_set_error_handler_off(); });
}

std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

std::string to_string(GreenMethod m) {
  return m == GreenMethod::BesselIntegral ? "bessel-integral" : "fft-grid";
}

Site canonical_site(const Site& x) {
  Site c{std::abs(x[0]), std::abs(x[1]), std::abs(x[2])};
  std::sort(c.begin(), c.end(), std::greater<int>());
  return c;
}

double green_free(const Site& x, double estar, double rel_tol) {
  if (!(estar > 0)) throw InvalidArgument("green_free needs E* > 0");
  quiet_gsl();
  Site c = canonical_site(x);
  BesselParams params{{c[0], c[1], c[2]}, estar};
  gsl_function F{&bessel_integrand, &params};
  const std::size_t limit = 4000;
  gsl_integration_workspace* w = gsl_integration_workspace_alloc(limit);
  double result = 0.0, abserr = 0.0;
  int status = gsl_integration_qagiu(&F, 0.0, 0.0, rel_tol, limit, w, &result, &abserr);
  gsl_integration_workspace_free(w);
  if (status != GSL_SUCCESS && !(abserr <= 10 * rel_tol * std::abs(result)))
    throw NumericalError(fmt::format("Bessel integral for x={} E*={} failed: {} (achieved {:.2e})",
                                     to_string(x), estar, gsl_strerror(status),
                                     abserr / std::abs(result)),
                         abserr / std::abs(result));
  return result;
}

GreenTable::GreenTable(double estar, int radius, GreenMethod method, int grid_size,
                       double tolerance, std::vector<double> cube_values)
    : estar_(estar),
      radius_(radius),
      method_(method),
      grid_size_(grid_size),
      tolerance_(tolerance),
      values_(std::move(cube_values)) {
  std::size_t r1 = std::size_t(radius_) + 1;
  if (values_.size() != r1 * r1 * r1) throw InvalidArgument("GreenTable: value array has wrong size");
}

bool GreenTable::contains(const Site& x) const {
  return double(x[0]) * x[0] + double(x[1]) * x[1] + double(x[2]) * x[2] <=
         double(radius_) * radius_;
}

double GreenTable::operator()(const Site& x) const {
  if (!contains(x))
    throw std::out_of_range(fmt::format("site {} outside Green table radius {}", to_string(x), radius_));
  Site c = canonical_site(x);
  return values_[slot(c[0], c[1], c[2])];
}

void GreenTable::for_each_canonical(const std::function<void(const Site&, double)>& fn) const {
  for (int a = 0; a <= radius_; ++a)
    for (int b = 0; b <= a; ++b)
      for (int c = 0; c <= b; ++c) {
        Site s{a, b, c};
        if (contains(s)) fn(s, values_[slot(a, b, c)]);
      }
}

std::size_t GreenTable::canonical_count() const {
  std::size_t n = 0;
  for_each_canonical([&](const Site&, double) { ++n; });
  return n;
}

void GreenTable::write_csv(std::ostream& out) const {
  nlohmann::json h{{"estar", estar_},      {"method", to_string(method_)},
                   {"tolerance", tolerance_}, {"radius", radius_},
                   {"grid_size", grid_size_}, {"symmetry", "canonical octant x1>=x2>=x3>=0"}};
  out << "# " << h.dump() << "\n";
  out << "x1,x2,x3,value\n";
  for_each_canonical([&](const Site& s, double v) {
    out << fmt::format("{},{},{},{:.17g}\n", s[0], s[1], s[2], v);
  });
}

GreenTable GreenTable::read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0)
    throw InvalidArgument("Green table CSV lacks its JSON header");
  auto h = nlohmann::json::parse(line.substr(2));
  std::getline(in, line);  // column names
  int radius = h.at("radius").get<int>();
  std::size_t r1 = std::size_t(radius) + 1;
  std::vector<double> values(r1 * r1 * r1, std::nan(""));
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    int a, b, c;
    char comma;
    double v;
    ss >> a >> comma >> b >> comma >> c >> comma >> v;
    if (!ss) throw InvalidArgument("malformed Green table row: " + line);
    values[(std::size_t(a) * r1 + b) * r1 + c] = v;
  }
  GreenMethod m = h.at("method").get<std::string>() == "fft-grid" ? GreenMethod::FftGrid
                                                                  : GreenMethod::BesselIntegral;
  return GreenTable(h.at("estar").get<double>(), radius, m, h.at("grid_size").get<int>(),
                    h.at("tolerance").get<double>(), std::move(values));
}

GreenTable build_green_table(double estar, int radius, const GreenTableOptions& opts) {
  if (radius < 0) throw InvalidArgument("radius must be >= 0");
  if (radius > 64 && !opts.allow_large_radius)
    throw InvalidArgument("Green table radius above 64 needs allow_large_radius");
  std::size_t r1 = std::size_t(radius) + 1;
  std::vector<double> values(r1 * r1 * r1, std::nan(""));
  std::vector<Site> sites;
  for (int a = 0; a <= radius; ++a)
    for (int b = 0; b <= a; ++b)
      for (int c = 0; c <= b; ++c)
        if (double(a) * a + double(b) * b + double(c) * c <= double(radius) * radius)
          sites.push_back({a, b, c});
  parallel_for_blocks(sites.size(), opts.threads, [&](std::size_t i) {
    const Site& s = sites[i];
    values[(std::size_t(s[0]) * r1 + s[1]) * r1 + s[2]] = green_free(s, estar, opts.rel_tol);
  });
  return GreenTable(estar, radius, GreenMethod::BesselIntegral, 0, opts.rel_tol, std::move(values));
}

double axis_decay_rate(double estar) { return std::acosh(1.0 + estar); }

double periodization_error_estimate(const Site& x, int M, double estar) {
  double mu = axis_decay_rate(estar);
  double r0 = torus_integral_I1(estar).value;
  double sum = 0.0;
  for (int i = -2; i <= 2; ++i)
    for (int j = -2; j <= 2; ++j)
      for (int k = -2; k <= 2; ++k) {
        if (i == 0 && j == 0 && k == 0) continue;
        Site y{x[0] + i * M, x[1] + j * M, x[2] + k * M};
        sum += r0 * std::exp(-mu * norm_sup(y));
      }
  return sum;
}

GreenTable green_free_fft(int M, double estar, int radius, double tolerance) {
  if (M < 64 || M % 2) throw InvalidArgument("FFT grid must be even and >= 64");
  if (!(estar > 0)) throw InvalidArgument("green_free_fft needs E* > 0");
  if (radius < 0 || radius > M / 2) throw InvalidArgument("radius must lie in [0, M/2]");
  // The worst tabulated site sits on an axis at distance `radius`.
  double err = periodization_error_estimate({radius, 0, 0}, M, estar);
  if (err > tolerance)
    throw NumericalError(fmt::format("grid M={} too small at E*={} for radius {}: periodization "
                                     "error estimate {:.2e} > {:.1e}",
                                     M, estar, radius, err, tolerance),
                         err);
  const int n = M / 2 + 1;
  std::vector<double> c(n);
  for (int k = 0; k < n; ++k) {
    double s = std::sin(kPi * k / M);
    c[k] = 2.0 * s * s;
  }
  std::size_t total = std::size_t(n) * n * n;
  double* in = fftw_alloc_real(total);
  double* out = fftw_alloc_real(total);
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    plan = fftw_plan_r2r_3d(n, n, n, in, out, FFTW_REDFT00, FFTW_REDFT00, FFTW_REDFT00,
                            FFTW_ESTIMATE);
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        in[(std::size_t(i) * n + j) * n + k] = 1.0 / (c[i] + c[j] + c[k] + estar);
  fftw_execute(plan);
  double scale = 1.0 / (double(M) * M * M);
  std::size_t r1 = std::size_t(radius) + 1;
  std::vector<double> values(r1 * r1 * r1, std::nan(""));
  for (int a = 0; a <= radius; ++a)
    for (int b = 0; b <= a; ++b)
      for (int cc = 0; cc <= b; ++cc)
        if (double(a) * a + double(b) * b + double(cc) * cc <= double(radius) * radius)
          values[(std::size_t(a) * r1 + b) * r1 + cc] = out[(std::size_t(a) * n + b) * n + cc] * scale;
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(in);
  fftw_free(out);
  return GreenTable(estar, radius, GreenMethod::FftGrid, M, tolerance, std::move(values));
}

AsymptoticsReport check_asymptotics(int r_min, int r_max, double estar, int envelope_radius) {
  if (!(estar > 0)) throw InvalidArgument("check_asymptotics needs E* > 0");
  if (r_min < 1 || r_max <= r_min) throw InvalidArgument("need 1 <= r_min < r_max");
  AsymptoticsReport rep;
  rep.estar = estar;
  rep.r_min = r_min;
  rep.r_max = r_max;
  rep.continuum_rate = std::sqrt(2.0 * estar);
  std::vector<double> xs, ys;
  for (int r = r_min; r <= r_max; ++r) {
    double g = green_free({r, 0, 0}, estar);
    double ratio = g * 2.0 * kPi * (r + 1) * std::exp(rep.continuum_rate * r);
    rep.distances.push_back(r);
    rep.values.push_back(g);
    rep.ratios.push_back(ratio);
    xs.push_back(r);
    ys.push_back(std::log(g * 2.0 * kPi * (r + 1)));
  }
  auto fit = fit_line(xs, ys);
  rep.fitted_rate = -fit.slope;
  rep.rate_ratio = rep.fitted_rate / rep.continuum_rate;
  rep.ratio_min = *std::min_element(rep.ratios.begin(), rep.ratios.end());
  rep.ratio_max = *std::max_element(rep.ratios.begin(), rep.ratios.end());

  // Envelope |ratio-1| <= c1 sqrt(E*) + c2/r: least squares, clamped, then inflated to cover.
  double se = std::sqrt(estar);
  std::size_t m = rep.ratios.size();
  double a11 = 0, a12 = 0, a22 = 0, b1 = 0, b2 = 0;
  for (std::size_t i = 0; i < m; ++i) {
    double d = std::abs(rep.ratios[i] - 1.0), u = se, v = 1.0 / rep.distances[i];
    a11 += u * u, a12 += u * v, a22 += v * v, b1 += u * d, b2 += v * d;
  }
  double det = a11 * a22 - a12 * a12;
  double c1 = det != 0 ? (b1 * a22 - b2 * a12) / det : 0.0;
  double c2 = det != 0 ? (a11 * b2 - a12 * b1) / det : 0.0;
  if (c1 < 0) c1 = 0, c2 = std::max(0.0, b2 / a22);
  if (c2 < 0) c2 = 0, c1 = std::max(0.0, b1 / a11);
  double slack = 0;
  for (std::size_t i = 0; i < m; ++i)
    slack = std::max(slack, std::abs(rep.ratios[i] - 1.0) - c1 * se - c2 / rep.distances[i]);
  rep.c1 = c1 + slack / se;
  rep.c2 = c2;

  double K = 0;
  for (std::size_t i = 0; i < m; ++i) K = std::max(K, rep.values[i] * (rep.distances[i] + 1));
  if (envelope_radius > 0) {
    auto table = build_green_table(estar, envelope_radius);
    table.for_each_canonical([&](const Site& s, double v) { K = std::max(K, v * (norm(s) + 1)); });
  }
  rep.envelope_K = K;
  rep.envelope_radius = envelope_radius;
  return rep;
}

double resolvent_identity_residual(const GreenTable& g, int patch_radius) {
  if (patch_radius > g.radius() - 1) throw InvalidArgument("patch must fit inside table radius - 1");
  double worst = 0;
  const double diag = 3.0 + g.estar();
  for (int a = -patch_radius; a <= patch_radius; ++a)
    for (int b = -patch_radius; b <= patch_radius; ++b)
      for (int c = -patch_radius; c <= patch_radius; ++c) {
        Site x{a, b, c};
        if (norm(x) > patch_radius) continue;
        double v = diag * g(x);
        for (int ax = 0; ax < 3; ++ax)
          for (int s : {-1, 1}) {
            Site y = x;
            y[ax] += s;
            v -= 0.5 * g(y);
          }
        if (a == 0 && b == 0 && c == 0) v -= 1.0;
        worst = std::max(worst, std::abs(v));
      }
  return worst;
}

}  // namespace lifshitz
