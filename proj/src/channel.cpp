// SPDX-License-Identifier: Apache-2.0
#include "marisa/channel.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace marisa {

using nlohmann::json;

namespace {

constexpr double kPi = std::numbers::pi;

Complex cn(Rng& rng, double variance) {
  std::normal_distribution<double> n01;
  const double s = std::sqrt(variance / 2.0);
  const double re = n01(rng);
  const double im = n01(rng);
  return {s * re, s * im};
}

double dist(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

}  // namespace

Rng make_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32), 0x5eedu};
  return Rng(seq);
}

RISConfiguration RISConfiguration::from_phases(const RealVector& phases) {
  RISConfiguration r;
  r.phases = phases;
  r.v.resize(phases.size());
  for (Eigen::Index i = 0; i < phases.size(); ++i) {
    double p = std::fmod(phases(i), 2.0 * kPi);
    if (p < 0) p += 2.0 * kPi;
    r.phases(i) = p;
    r.v(i) = std::polar(1.0, p);
  }
  r.V = HermitianMatrix::outer(r.v);
  return r;
}

RISConfiguration RISConfiguration::from_vector(const ComplexVector& v) {
  RealVector ph(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) ph(i) = std::abs(v(i)) > 0.0 ? std::arg(v(i)) : 0.0;
  return from_phases(ph);
}

RISConfiguration RISConfiguration::all_ones(int n) { return from_phases(RealVector::Zero(n)); }

double distance_diff(Point2 t, double elev, double azim) {
  return t.x * std::sin(elev) * std::cos(azim) + t.y * std::cos(elev);
}

ComplexVector frv(Point2 t, const RealVector& elevs, const RealVector& azims, double lambda) {
  if (elevs.size() != azims.size()) throw std::invalid_argument("frv: angle lists differ in length");
  ComplexVector f(elevs.size());
  const double k = 2.0 * kPi / lambda;
  for (Eigen::Index i = 0; i < elevs.size(); ++i) f(i) = std::polar(1.0, k * distance_diff(t, elevs(i), azims(i)));
  return f;
}

ComplexMatrix frm(const std::vector<Point2>& points, const RealVector& elevs, const RealVector& azims,
                  double lambda) {
  ComplexMatrix F(elevs.size(), static_cast<Eigen::Index>(points.size()));
  for (std::size_t l = 0; l < points.size(); ++l) F.col(l) = frv(points[l], elevs, azims, lambda);
  return F;
}

std::vector<Point2> ris_grid(int n, double lambda) {
  int rows = 1;
  for (int r = 1; r * r <= n; ++r)
    if (n % r == 0) rows = r;
  const int cols = n / rows;
  const double s = lambda / 2.0;
  std::vector<Point2> pts;
  pts.reserve(n);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) pts.push_back({(c - (cols - 1) / 2.0) * s, (r - (rows - 1) / 2.0) * s});
  return pts;
}

AntennaPositions initial_positions(const SystemConfig& c) {
  const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(c.L))));
  const int rows = (c.L + cols - 1) / cols;
  const double s = std::max(c.lambda / 2.0, c.D);
  AntennaPositions p;
  for (int l = 0; l < c.L; ++l) {
    const int r = l / cols, q = l % cols;
    const int in_row = std::min(cols, c.L - r * cols);
    p.t.push_back({(q - (in_row - 1) / 2.0) * s, (r - (rows - 1) / 2.0) * s});
  }
  return p;
}

double path_gain(const SystemConfig& c, double distance, double nu) {
  return c.P0 * std::pow(std::max(distance, 1.0), -nu);
}

ComplexMatrix sample_path_response(const SystemConfig& c, Rng& rng) {
  const int lp = c.L_p();
  const double total = path_gain(c, dist(c.bs_pos, c.ris_pos), c.nu1);
  ComplexMatrix lam = ComplexMatrix::Zero(c.L_r, c.L_t);
  if (lp == 1) {
    lam(0, 0) = cn(rng, total);
    return lam;
  }
  const double k = c.rician_k;
  lam(0, 0) = cn(rng, k / (k + 1.0) * total);
  for (int i = 1; i < lp; ++i) lam(i, i) = cn(rng, total / (k + 1.0) / (lp - 1));
  return lam;
}

std::vector<Point2> sample_user_positions(const SystemConfig& c, Rng& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::vector<Point2> users;
  for (int m = 0; m < c.M; ++m) {
    const double r = c.user_disk_radius * std::sqrt(u01(rng));
    const double th = 2.0 * kPi * u01(rng);
    users.push_back({c.user_disk_center.x + r * std::cos(th), c.user_disk_center.y + r * std::sin(th)});
  }
  return users;
}

std::vector<ComplexVector> sample_ris_user_channels(const SystemConfig& c, const std::vector<Point2>& users,
                                                    Rng& rng) {
  const std::vector<Point2> grid = ris_grid(c.N, c.lambda);
  const double k = c.ris_user_rician_k;
  std::vector<ComplexVector> hs;
  for (const auto& u : users) {
    const double d = dist(u, c.ris_pos);
    if (!(d > 0.0)) throw std::invalid_argument("sample_ris_user_channels: user at the RIS position");
    double az = std::atan2(u.y - c.ris_pos.y, u.x - c.ris_pos.x);
    if (az < 0) az = -az;  // fold into [0, pi]
    RealVector el(1), azv(1);
    el(0) = kPi / 2.0;
    azv(0) = az;
    ComplexVector a(c.N);
    for (int n = 0; n < c.N; ++n) a(n) = frv(grid[n], el, azv, c.lambda)(0);
    ComplexVector h(c.N);
    const double los = std::sqrt(k / (k + 1.0)), nlos = std::sqrt(1.0 / (k + 1.0));
    for (int n = 0; n < c.N; ++n) h(n) = los * a(n) + nlos * cn(rng, 1.0);
    hs.push_back(std::sqrt(path_gain(c, d, c.nu2)) * h);
  }
  return hs;
}

ChannelRealization sample_realization(const SystemConfig& c, Rng& rng) {
  c.validate();
  ChannelRealization r;
  r.wavelength = c.lambda;
  r.sigma2 = c.sigma2;
  r.user_positions = sample_user_positions(c, rng);
  std::uniform_real_distribution<double> ang(0.0, kPi);
  auto angles = [&](int n) {
    RealVector v(n);
    for (int i = 0; i < n; ++i) v(i) = ang(rng);
    return v;
  };
  r.geometry.tx_elev = angles(c.L_t);
  r.geometry.tx_azim = angles(c.L_t);
  r.geometry.rx_elev = angles(c.L_r);
  r.geometry.rx_azim = angles(c.L_r);
  r.geometry.ris_element_positions = ris_grid(c.N, c.lambda);
  r.F_r = frm(r.geometry.ris_element_positions, r.geometry.rx_elev, r.geometry.rx_azim, c.lambda);
  r.Lambda = sample_path_response(c, rng);
  r.h_ris_user = sample_ris_user_channels(c, r.user_positions, rng);
  const auto g = effective_channels(r, initial_positions(c), ComplexVector::Ones(c.N));
  r.rho_hat2.resize(c.M);
  for (int m = 0; m < c.M; ++m) r.rho_hat2(m) = c.rho * g[m].squaredNorm();
  return r;
}

ComplexMatrix bs_ris_channel(const ChannelRealization& r, const AntennaPositions& pos) {
  const ComplexMatrix Ft = frm(pos.t, r.geometry.tx_elev, r.geometry.tx_azim, r.wavelength);
  return r.F_r.adjoint() * r.Lambda * Ft;
}

ComplexVector effective_user_channel(const ChannelRealization& r, const ComplexMatrix& H, const ComplexVector& v,
                                     int m) {
  const ComplexVector& h = r.h_ris_user.at(m);
  return H.adjoint() * (v.conjugate().array() * h.array()).matrix();
}

ComplexVector effective_user_channel(const ChannelRealization& r, const AntennaPositions& pos,
                                     const RISConfiguration& ris, int m) {
  return effective_user_channel(r, bs_ris_channel(r, pos), ris.v, m);
}

std::vector<ComplexVector> effective_channels(const ChannelRealization& r, const AntennaPositions& pos,
                                              const ComplexVector& v) {
  const ComplexMatrix H = bs_ris_channel(r, pos);
  std::vector<ComplexVector> g;
  for (int m = 0; m < r.num_users(); ++m) g.push_back(effective_user_channel(r, H, v, m));
  return g;
}

ComplexVector sample_error_in_ball(double radius, int dim, Rng& rng) {
  if (radius < 0.0) throw std::invalid_argument("sample_error_in_ball: negative radius");
  ComplexVector z(dim);
  if (radius == 0.0 || dim == 0) return ComplexVector::Zero(dim);
  std::normal_distribution<double> n01;
  for (int i = 0; i < dim; ++i) {
    const double re = n01(rng);
    const double im = n01(rng);
    z(i) = {re, im};
  }
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const double scale = radius * std::pow(u01(rng), 1.0 / (2.0 * dim)) / z.norm();
  z *= scale;
  if (z.norm() > radius) z *= radius / z.norm();
  return z;
}

HermitianMatrix estimated_covariance(const ChannelRealization& r, const AntennaPositions& pos,
                                     const RISConfiguration& ris, int m) {
  return HermitianMatrix::outer(effective_user_channel(r, pos, ris, m));
}

// ---------------------------------------------------------------------------
// JSON

namespace {

json cvec_json(const ComplexVector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back({v(i).real(), v(i).imag()});
  return a;
}

ComplexVector cvec_from(const json& a) {
  ComplexVector v(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) v(i) = {a[i].at(0).get<double>(), a[i].at(1).get<double>()};
  return v;
}

json rvec_json(const RealVector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

RealVector rvec_from(const json& a) {
  RealVector v(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) v(i) = a[i].get<double>();
  return v;
}

json points_json(const std::vector<Point2>& pts) {
  json a = json::array();
  for (const auto& p : pts) a.push_back({p.x, p.y});
  return a;
}

std::vector<Point2> points_from(const json& a) {
  std::vector<Point2> pts;
  for (const auto& p : a) pts.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
  return pts;
}

}  // namespace

json realization_to_json(const ChannelRealization& r) {
  json h = json::array();
  for (const auto& v : r.h_ris_user) h.push_back(cvec_json(v));
  return json{{"wavelength", r.wavelength},
              {"sigma2", r.sigma2},
              {"tx_elev", rvec_json(r.geometry.tx_elev)},
              {"tx_azim", rvec_json(r.geometry.tx_azim)},
              {"rx_elev", rvec_json(r.geometry.rx_elev)},
              {"rx_azim", rvec_json(r.geometry.rx_azim)},
              {"ris_element_positions", points_json(r.geometry.ris_element_positions)},
              {"lambda_diag", cvec_json(r.Lambda.diagonal())},
              {"user_positions", points_json(r.user_positions)},
              {"h_ris_user", h},
              {"rho_hat2", rvec_json(r.rho_hat2)}};
}

ChannelRealization realization_from_json(const json& j) {
  ChannelRealization r;
  r.wavelength = j.at("wavelength").get<double>();
  r.sigma2 = j.at("sigma2").get<double>();
  r.geometry.tx_elev = rvec_from(j.at("tx_elev"));
  r.geometry.tx_azim = rvec_from(j.at("tx_azim"));
  r.geometry.rx_elev = rvec_from(j.at("rx_elev"));
  r.geometry.rx_azim = rvec_from(j.at("rx_azim"));
  r.geometry.ris_element_positions = points_from(j.at("ris_element_positions"));
  const ComplexVector d = cvec_from(j.at("lambda_diag"));
  r.Lambda = d.asDiagonal();
  r.F_r = frm(r.geometry.ris_element_positions, r.geometry.rx_elev, r.geometry.rx_azim, r.wavelength);
  r.user_positions = points_from(j.at("user_positions"));
  for (const auto& h : j.at("h_ris_user")) r.h_ris_user.push_back(cvec_from(h));
  r.rho_hat2 = rvec_from(j.at("rho_hat2"));
  return r;
}

}  // namespace marisa
