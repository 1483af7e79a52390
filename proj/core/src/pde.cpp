#include "votersim/pde.hpp"

#include <algorithm>
#include <cmath>

#include "votersim/error.hpp"

namespace votersim {

namespace {

constexpr double kUnitTol = 1e-9;
constexpr double kCflMargin = 0.9;

std::size_t step_count(double T, double dt) {
  if (T <= 0) return 0;
  return static_cast<std::size_t>(std::ceil(T / dt - 1e-12));
}

// Shared RK4 driver; rhs(u, out) writes du/dt.
template <class Rhs>
PdeResult integrate(std::vector<double> u, double T, double dt, Rhs&& rhs, std::span<const double> frame_times) {
  PdeResult res;
  const std::size_t steps = step_count(T, dt);
  const double h = steps ? T / static_cast<double>(steps) : 0.0;
  const std::size_t n = u.size();
  std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
  std::size_t next_frame = 0;
  auto take_frames = [&](double t) {
    while (next_frame < frame_times.size() && frame_times[next_frame] <= t + 1e-12) {
      res.frames.push_back({t, u});
      ++next_frame;
    }
  };
  take_frames(0.0);
  for (std::size_t s = 0; s < steps; ++s) {
    rhs(u, k1);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = u[i] + 0.5 * h * k1[i];
    rhs(tmp, k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = u[i] + 0.5 * h * k2[i];
    rhs(tmp, k3);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = u[i] + h * k3[i];
    rhs(tmp, k4);
    for (std::size_t i = 0; i < n; ++i) u[i] += h / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
    take_frames(h * static_cast<double>(s + 1));
  }
  res.u = std::move(u);
  return res;
}

void check_profile(std::span<const double> v) {
  for (double x : v)
    if (!(x >= -kUnitTol && x <= 1 + kUnitTol)) throw Error(Errc::InvalidArgument, "initial values must lie in [0, 1]");
}

}  // namespace

Grid1D Grid1D::make(double x_min, double x_max, double dx, double sigma2, double dt) {
  Grid1D g{x_min, x_max, dx, dt, sigma2};
  if (!(dx > 0) || !(sigma2 > 0) || !(x_max > x_min)) throw Error(Errc::InvalidArgument, "bad grid");
  if (dt == 0) g.dt = kCflMargin * g.dt_limit();
  g.check();
  return g;
}

std::size_t Grid1D::points() const { return static_cast<std::size_t>(std::llround((x_max - x_min) / dx)); }

void Grid1D::check() const {
  if (!(dt > 0) || dt > dt_limit() * (1 + 1e-12)) throw Error(Errc::CFLViolation, "dt exceeds dx^2/(2 sigma2)");
}

RadialGrid RadialGrid::make(double r_max, double dr, double sigma2, int d, double dt) {
  RadialGrid g{r_max, dr, dt, sigma2, d};
  if (!(dr > 0) || !(sigma2 > 0) || !(r_max > dr) || d < 1) throw Error(Errc::InvalidArgument, "bad radial grid");
  if (dt == 0) g.dt = kCflMargin * g.dt_limit();
  g.check();
  return g;
}

std::size_t RadialGrid::points() const { return static_cast<std::size_t>(std::llround(r_max / dr)) + 1; }

void RadialGrid::check() const {
  if (!(dt > 0) || dt > dt_limit() * (1 + 1e-12)) throw Error(Errc::CFLViolation, "dt exceeds dr^2/(2 d sigma2)");
}

double solve_ode(const RealPoly& f, double u0, double T, double dt) {
  if (!(u0 >= 0 && u0 <= 1)) throw Error(Errc::InvalidArgument, "u0 must lie in [0, 1]");
  if (!(dt > 0)) throw Error(Errc::InvalidArgument, "dt must be positive");
  const std::size_t steps = step_count(T, dt);
  const double h = steps ? T / static_cast<double>(steps) : 0.0;
  double u = u0;
  for (std::size_t s = 0; s < steps; ++s) {
    double k1 = f(u);
    double k2 = f(u + 0.5 * h * k1);
    double k3 = f(u + 0.5 * h * k2);
    double k4 = f(u + h * k3);
    u += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
    if (!(u >= -kUnitTol && u <= 1 + kUnitTol)) throw Error(Errc::LeftUnitInterval, "ODE solution left [0, 1]");
  }
  return u;
}

PdeResult solve_rd_1d(const RealPoly& f, std::vector<double> v, double T, const Grid1D& grid,
                      std::span<const double> frame_times) {
  grid.check();
  const std::size_t n = grid.points();
  if (v.size() != n) throw Error(Errc::InvalidArgument, "initial profile does not match the grid");
  if (n < 2) throw Error(Errc::InvalidArgument, "grid needs at least two cells");
  check_profile(v);
  const double c = 0.5 * grid.sigma2 / (grid.dx * grid.dx);
  auto rhs = [&](const std::vector<double>& u, std::vector<double>& out) {
    out[0] = c * (u[1] - u[0]) + f(u[0]);
    for (std::size_t i = 1; i + 1 < n; ++i) out[i] = c * (u[i + 1] - 2 * u[i] + u[i - 1]) + f(u[i]);
    out[n - 1] = c * (u[n - 2] - u[n - 1]) + f(u[n - 1]);
  };
  return integrate(std::move(v), T, grid.dt, rhs, frame_times);
}

PdeResult solve_rd_1d(const RealPoly& f, const std::function<double(double)>& v, double T, const Grid1D& grid,
                      std::span<const double> frame_times) {
  std::vector<double> u(grid.points());
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = v(grid.x(i));
  return solve_rd_1d(f, std::move(u), T, grid, frame_times);
}

PdeResult solve_rd_radial(const RealPoly& f, std::vector<double> v, double T, const RadialGrid& grid,
                          std::span<const double> frame_times) {
  grid.check();
  const std::size_t n = grid.points();
  if (v.size() != n) throw Error(Errc::InvalidArgument, "initial profile does not match the grid");
  check_profile(v);
  const double D = 0.5 * grid.sigma2;
  const double dr = grid.dr;
  const int d = grid.d;
  auto rhs = [&](const std::vector<double>& u, std::vector<double>& out) {
    out[0] = D * d * 2.0 * (u[1] - u[0]) / (dr * dr) + f(u[0]);
    for (std::size_t i = 1; i < n; ++i) {
      double right = i + 1 < n ? u[i + 1] : u[i - 1];
      double urr = (right - 2 * u[i] + u[i - 1]) / (dr * dr);
      double ur = (right - u[i - 1]) / (2 * dr);
      out[i] = D * (urr + (d - 1) / grid.r(i) * ur) + f(u[i]);
    }
  };
  return integrate(std::move(v), T, grid.dt, rhs, frame_times);
}

double kpp_speed_bound(const RealPoly& f, double sigma2) {
  // f(u)/u as a polynomial when f(0) = 0
  double sup = 0;
  const int m = 2000;
  for (int i = 1; i <= m; ++i) {
    double u = static_cast<double>(i) / m;
    sup = std::max(sup, f(u) / u);
  }
  if (f.coeff(0) == 0) sup = std::max(sup, f.coeff(1));
  return std::sqrt(2 * sigma2 * sup);
}

WaveSpeed wave_speed(const RealPoly& f, const WaveOptions& opt) {
  if (!(opt.T > 0) || !(opt.sample_every > 0)) throw Error(Errc::InvalidArgument, "bad wave options");
  const double level = opt.level > 0 ? opt.level : 0.5 * opt.rho;
  WaveSpeed ws;
  double I = f.integral(0.0, 1.0);
  ws.integral_sign = (I > 0) - (I < 0);
  const double cmax = std::max(kpp_speed_bound(f, opt.sigma2), 0.05);
  ws.half_width = opt.half_width > 0 ? opt.half_width : 3 * cmax * opt.T + 50 * opt.dx;
  Grid1D grid = Grid1D::make(-ws.half_width, ws.half_width, opt.dx, opt.sigma2);
  const std::size_t n = grid.points();
  std::vector<double> u(n);
  for (std::size_t i = 0; i < n; ++i) u[i] = grid.x(i) < 0 ? opt.rho : 0.0;

  auto front = [&](const std::vector<double>& p) {
    for (std::size_t i = n - 1; i-- > 0;) {
      if (p[i] >= level && p[i + 1] < level) {
        double a = (p[i] - level) / (p[i] - p[i + 1]);
        return grid.x(i) + a * grid.dx;
      }
    }
    throw Error(Errc::NoFront, "profile does not cross the tracking level");
  };

  std::vector<double> sample_times;
  for (double t = opt.sample_every; t <= opt.T + 1e-12; t += opt.sample_every) sample_times.push_back(t);
  // run in chunks so a front hitting the boundary aborts early
  double t = 0;
  const double guard = 10 * opt.dx;
  for (double target : sample_times) {
    PdeResult r = solve_rd_1d(f, std::move(u), target - t, grid);
    u = std::move(r.u);
    t = target;
    double x = front(u);
    if (x < grid.x_min + guard || x > grid.x_max - guard)
      throw Error(Errc::FrontAtBoundary, "front reached the domain boundary");
    ws.times.push_back(t);
    ws.positions.push_back(x);
  }
  const std::size_t from = ws.times.size() * 2 / 3;
  const std::size_t m = ws.times.size() - from;
  if (m < 2) throw Error(Errc::InvalidArgument, "too few samples for a slope");
  double mt = 0, mx = 0;
  for (std::size_t i = from; i < ws.times.size(); ++i) {
    mt += ws.times[i];
    mx += ws.positions[i];
  }
  mt /= static_cast<double>(m);
  mx /= static_cast<double>(m);
  double sxy = 0, sxx = 0;
  for (std::size_t i = from; i < ws.times.size(); ++i) {
    sxy += (ws.times[i] - mt) * (ws.positions[i] - mx);
    sxx += (ws.times[i] - mt) * (ws.times[i] - mt);
  }
  ws.speed = sxy / sxx;
  return ws;
}

}  // namespace votersim
