#pragma once

#include <functional>
#include <span>
#include <vector>

#include "votersim/reaction.hpp"

namespace votersim {

// Cell-centred grid on [x_min, x_max] with zero-flux boundaries.
struct Grid1D {
  double x_min = 0, x_max = 1, dx = 0.1, dt = 0, sigma2 = 1;

  // dt = 0 picks 0.9 of the stability limit
  static Grid1D make(double x_min, double x_max, double dx, double sigma2, double dt = 0);
  std::size_t points() const;
  double x(std::size_t i) const { return x_min + (static_cast<double>(i) + 0.5) * dx; }
  // largest dt allowed: dx^2 / (2 sigma2)
  double dt_limit() const { return 0.5 * dx * dx / sigma2; }
  void check() const;
};

// Vertex-centred radial grid r_i = i dr on [0, r_max] for a radially
// symmetric solution in R^d.
struct RadialGrid {
  double r_max = 1, dr = 0.1, dt = 0, sigma2 = 1;
  int d = 1;

  static RadialGrid make(double r_max, double dr, double sigma2, int d, double dt = 0);
  std::size_t points() const;
  double r(std::size_t i) const { return static_cast<double>(i) * dr; }
  double dt_limit() const { return 0.5 * dr * dr / (sigma2 * d); }
  void check() const;
};

struct Frame {
  double t;
  std::vector<double> u;
};

struct PdeResult {
  std::vector<double> u;
  std::vector<Frame> frames;
};

// RK4 with ceil(T/dt) equal steps.
double solve_ode(const RealPoly& f, double u0, double T, double dt = 1e-3);

// u_t = sigma2/2 u_xx + f(u), method of lines with RK4 in time. A frame is
// stored at the first step reaching each requested time.
PdeResult solve_rd_1d(const RealPoly& f, std::vector<double> v, double T, const Grid1D& grid,
                      std::span<const double> frame_times = {});
PdeResult solve_rd_1d(const RealPoly& f, const std::function<double(double)>& v, double T, const Grid1D& grid,
                      std::span<const double> frame_times = {});

PdeResult solve_rd_radial(const RealPoly& f, std::vector<double> v, double T, const RadialGrid& grid,
                          std::span<const double> frame_times = {});

struct WaveSpeed {
  double speed = 0;
  int integral_sign = 0;  // sign of the integral of f over [0, 1]
  double half_width = 0;
  std::vector<double> times, positions;
};

struct WaveOptions {
  double sigma2 = 1;
  double dx = 0.1;
  double T = 60;
  double rho = 1;             // the front connects rho (left) to 0 (right)
  double level = -1;          // tracking level, default rho/2
  double sample_every = 0.1;  // time between recorded front positions
  double half_width = 0;      // 0 sizes the domain from the speed bound
};

// Front position of the level crossing from a step at x = 0; speed is the
// least-squares slope over the final third of the run.
WaveSpeed wave_speed(const RealPoly& f, const WaveOptions& opt);

// Upper bound on front speeds, sqrt(2 sigma2 sup f(u)/u) over (0, 1].
double kpp_speed_bound(const RealPoly& f, double sigma2);

}  // namespace votersim
