#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "cli_util.hpp"
#include "spinline/spinline.h"

namespace fs = std::filesystem;
using namespace cli;

namespace {

struct Global {
  std::string config;
  std::string out = "out";
  int jobs = 0;
  std::uint64_t seed = 1;
};

struct Context {
  const Global& g;
  Provenance prov;
  std::vector<CellError> errors;
  std::mutex lock;

  void error(const std::string& cell, const std::string& msg) {
    std::lock_guard<std::mutex> l(lock);
    errors.push_back({cell, msg});
  }

  std::ofstream open(const std::string& name) {
    fs::create_directories(g.out);
    const fs::path p = fs::path(g.out) / name;
    std::ofstream o(p);
    if (!o) throw std::runtime_error("cannot write " + p.string());
    o.precision(17);
    prov.write(o);
    return o;
  }
};

std::string clean(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  return s;
}

using Grid = std::vector<std::string>;

CLI::Option* grid_option(CLI::App* app, const std::string& name, Grid& g, const std::string& help) {
  return app->add_option("--" + name, g, help)->capture_default_str();
}

std::string grid_text(const Grid& g) { return join(g); }

bool one_of(const std::string& v, std::initializer_list<const char*> allowed) {
  for (const char* a : allowed)
    if (v == a) return true;
  return false;
}

// ---------------------------------------------------------------- ed-thermo

struct EdThermo {
  Grid n{"2"}, psi{"0"}, B{"0"}, T{"log:0.007:70:121"};
  double J = 0.7, epsilon = 0.0, g = 2.004;
  std::string boundary = "open";
  int powder = 0;
  bool composite = false;
  double dimer_J = 21.0, radical_fraction = 0.85, dilution = 0.85;
  int n_max = 8;

  void attach(CLI::App* app) {
    grid_option(app, "n", n, "chain lengths");
    grid_option(app, "psi", psi, "anisotropy angles (rad)");
    grid_option(app, "B", B, "fields (T)");
    grid_option(app, "T", T, "temperatures (K)");
    app->add_option("--J", J, "exchange (K)")->capture_default_str();
    app->add_option("--epsilon", epsilon, "anisotropy")->capture_default_str();
    app->add_option("--g", g, "g factor")->capture_default_str();
    app->add_option("--boundary", boundary, "open or periodic")->capture_default_str();
    app->add_option("--powder", powder, "psi quadrature nodes, 0 for fixed psi")->capture_default_str();
    app->add_option("--composite", composite, "also write the composite chi*T table")->capture_default_str();
    app->add_option("--dimer_J", dimer_J, "dimer exchange (K)")->capture_default_str();
    app->add_option("--radical_fraction", radical_fraction)->capture_default_str();
    app->add_option("--dilution", dilution, "chain continuation probability")->capture_default_str();
    app->add_option("--n_max", n_max, "longest chain in the composite")->capture_default_str();
  }

  void run(Context& ctx) {
    const auto ns = parse_int_grid(grid_text(n), "n");
    const auto psis = parse_grid(grid_text(psi), "psi");
    const auto Bs = parse_grid(grid_text(B), "B");
    const auto Ts = parse_grid(grid_text(T), "T");
    if (!one_of(boundary, {"open", "periodic"})) throw UsageError("boundary must be open or periodic");
    if (powder < 0) throw UsageError("powder must be >= 0");
    for (double t : Ts)
      if (!(t > 0.0)) throw UsageError("T must be > 0");

    struct Cell {
      int n;
      double psi, B;
      std::vector<spl_thermo_row> rows;
      std::string error;
    };
    std::vector<Cell> cells;
    for (int k : ns)
      for (double p : powder > 0 ? std::vector<double>{NAN} : psis)
        for (double b : Bs) cells.push_back({k, p, b, {}, {}});

    parallel_for(cells.size(), ctx.g.jobs, [&](std::size_t i) {
      Cell& c = cells[i];
      spl_chain_params p;
      spl_chain_params_default(&p);
      p.n_spins = c.n;
      p.J = J;
      p.epsilon = epsilon;
      p.psi = std::isnan(c.psi) ? 0.0 : c.psi;
      p.g = g;
      p.periodic = boundary == "periodic";
      spl_thermo* t = nullptr;
      if (spl_chain_thermo(&p, c.B, Ts.data(), Ts.size(), powder, &t) != SPL_OK) {
        c.error = spl_last_error();
        return;
      }
      for (std::size_t k = 0; k < spl_thermo_size(t); ++k) {
        spl_thermo_row r;
        spl_thermo_row_at(t, k, &r);
        c.rows.push_back(r);
      }
      spl_thermo_free(t);
    });

    auto o = ctx.open("ed_thermo.csv");
    o << "T_K,B_T,psi_rad,n,c_per_spin,chi,chiT,m,corr_xx,errors\n";
    for (const Cell& c : cells) {
      const std::string label = "n=" + std::to_string(c.n) + " psi=" + num(c.psi) + " B=" + num(c.B);
      if (!c.error.empty()) {
        ctx.error(label, c.error);
        for (double t : Ts)
          o << num(t) << ',' << num(c.B) << ',' << num(c.psi) << ',' << c.n << ",nan,nan,nan,nan,nan,"
            << clean(c.error) << '\n';
        continue;
      }
      for (const auto& r : c.rows)
        o << num(r.T) << ',' << num(c.B) << ',' << num(c.psi) << ',' << c.n << ',' << num(r.specific_heat) << ','
          << num(r.chi) << ',' << num(r.chi_T) << ',' << num(r.magnetization) << ',' << num(r.correlator_xx) << ",\n";
    }

    if (composite) {
      if (n_max < 1) throw UsageError("n_max must be >= 1");
      std::vector<double> w(static_cast<std::size_t>(n_max));
      check(spl_dilution_weights(dilution, n_max, w.data()), "dilution weights");
      spl_composite c;
      spl_composite_default(&c);
      c.dimer_J = dimer_J;
      c.chain_J = J;
      c.radical_fraction = radical_fraction;
      c.g = g;
      c.B = Bs.front();
      c.length_weights = w.data();
      c.n_weights = w.size();
      std::vector<double> chiT(Ts.size());
      auto oc = ctx.open("composite.csv");
      oc << "T_K,chiT,chiT_emu\n";
      if (spl_composite_chiT(&c, Ts.data(), Ts.size(), chiT.data()) != SPL_OK) {
        ctx.error("composite", spl_last_error());
        return;
      }
      for (std::size_t k = 0; k < Ts.size(); ++k) {
        double emu = NAN;
        spl_chiT_to_emu(chiT[k], g, &emu);
        oc << num(Ts[k]) << ',' << num(chiT[k]) << ',' << num(emu) << '\n';
      }
    }
  }
};

// ---------------------------------------------------------------- mf-phase

struct MfPhase {
  Grid psi{"0"}, T{"0.01:1:34"}, B{"0:1.2:41"};
  double J = 0.7, epsilon = -0.086, g = 2.004;

  void attach(CLI::App* app) {
    grid_option(app, "psi", psi, "anisotropy angles (rad)");
    grid_option(app, "T", T, "temperatures (K)");
    grid_option(app, "B", B, "fields (T)");
    app->add_option("--J", J, "exchange (K)")->capture_default_str();
    app->add_option("--epsilon", epsilon, "anisotropy")->capture_default_str();
    app->add_option("--g", g, "g factor")->capture_default_str();
  }

  void run(Context& ctx) {
    const auto psis = parse_grid(grid_text(psi), "psi");
    const auto Ts = parse_grid(grid_text(T), "T");
    const auto Bs = parse_grid(grid_text(B), "B");
    auto o = ctx.open("mf_phase.csv");
    o << "T_K,B_T,psi_rad,M,theta1_rad,theta2_rad,dtheta_eq_rad,F_K,phase\n";
    auto of = ctx.open("mf_fields.csv");
    of << "psi_rad,Bc_T,B_spin_flop_T,T_N_K\n";
    for (double ps : psis) {
      spl_mf_params p;
      spl_mf_params_default(&p);
      p.J = J;
      p.epsilon = epsilon;
      p.g = g;
      p.psi = ps;
      double Bc = NAN, Bsf = NAN, TN = NAN;
      spl_mf_critical_field(&p, &Bc);
      spl_mf_spin_flop_field(&p, &Bsf);
      spl_mf_neel_temperature(&p, &TN);
      of << num(ps) << ',' << num(Bc) << ',' << num(Bsf) << ',' << num(TN) << '\n';

      spl_phase_map* m = nullptr;
      check(spl_mf_phase_map(&p, Ts.data(), Ts.size(), Bs.data(), Bs.size(), ctx.g.jobs, &m), "phase map");
      for (std::size_t i = 0; i < spl_phase_map_size(m); ++i) {
        double t = 0, b = 0;
        spl_mf_state s;
        if (spl_phase_map_cell(m, i, &t, &b, &s) != SPL_OK) {
          ctx.error("psi=" + num(ps) + " T=" + num(t) + " B=" + num(b), spl_last_error());
          o << num(t) << ',' << num(b) << ',' << num(ps) << ",nan,nan,nan,nan,nan,error\n";
          continue;
        }
        o << num(t) << ',' << num(b) << ',' << num(ps) << ',' << num(0.5 * (s.M1 + s.M2)) << ',' << num(s.theta1)
          << ',' << num(s.theta2) << ',' << num(s.dtheta) << ',' << num(s.free_energy) << ','
          << spl_phase_name(s.phase) << '\n';
      }
      spl_phase_map_free(m);
    }
  }
};

// ---------------------------------------------------------------- resonance

double to_ghz(double kelvin) {
  double f = NAN;
  spl_kelvin_to_hz(kelvin, &f);
  return f / 1e9;
}

struct Resonance {
  Grid T{"0.01"}, B{"0.125"};
  double J = 0.7, epsilon = -0.086, g = 2.004, gilbert = -1.0, linewidth_MHz = 14.0;
  int nodes = 64;

  void attach(CLI::App* app) {
    grid_option(app, "T", T, "temperatures (K)");
    grid_option(app, "B", B, "fields (T)");
    app->add_option("--J", J, "exchange (K)")->capture_default_str();
    app->add_option("--epsilon", epsilon, "anisotropy")->capture_default_str();
    app->add_option("--g", g, "g factor")->capture_default_str();
    app->add_option("--nodes", nodes, "psi quadrature nodes")->capture_default_str();
    app->add_option("--gilbert", gilbert, "Gilbert damping, < 0 derives it from linewidth_MHz")
        ->capture_default_str();
    app->add_option("--linewidth_MHz", linewidth_MHz, "paramagnetic linewidth for the damping")
        ->capture_default_str();
  }

  void run(Context& ctx) {
    const auto Ts = parse_grid(grid_text(T), "T");
    const auto Bs = parse_grid(grid_text(B), "B");
    if (nodes < 1) throw UsageError("nodes must be >= 1");
    struct Cell {
      double T, B;
      std::vector<spl_mode_node> modes;
      std::string error;
    };
    std::vector<Cell> cells;
    for (double t : Ts)
      for (double b : Bs) cells.push_back({t, b, {}, {}});
    parallel_for(cells.size(), ctx.g.jobs, [&](std::size_t i) {
      Cell& c = cells[i];
      spl_mf_params p;
      spl_mf_params_default(&p);
      p.J = J;
      p.epsilon = epsilon;
      p.g = g;
      p.B = c.B;
      p.T = c.T;
      double gam = gilbert;
      if (gam < 0.0) {
        gam = 0.0;
        if (c.B > 0.0 && spl_gilbert_from_linewidth(linewidth_MHz * 1e6, c.B, g, &gam) != SPL_OK) {
          c.error = spl_last_error();
          return;
        }
      }
      c.modes.resize(static_cast<std::size_t>(nodes));
      if (spl_powder_modes(&p, gam, nodes, 1, c.modes.data()) != SPL_OK) c.error = spl_last_error();
    });

    auto os = ctx.open("resonance_summary.csv");
    os << "T_K,B_T,psi_rad,re_omega_GHz,im_omega_GHz,analytic_GHz,canted_exact_GHz\n";
    for (const Cell& c : cells) {
      const std::string label = "T=" + num(c.T) + " B=" + num(c.B);
      if (!c.error.empty()) {
        ctx.error(label, c.error);
        continue;
      }
      auto o = ctx.open("resonance_T" + tag(c.T) + "_B" + tag(c.B) + ".csv");
      o << "# T_K=" << num(c.T) << "\n# B_T=" << num(c.B) << "\n";
      o << "psi_rad,weight,re_omega_GHz,im_omega_GHz,phase_label,flags\n";
      for (const auto& m : c.modes) {
        if (!m.ok) ctx.error(label + " psi=" + num(m.psi), m.flags);
        o << num(m.psi) << ',' << num(m.weight) << ',' << num(to_ghz(m.omega.re)) << ','
          << num(to_ghz(m.omega.im)) << ',' << spl_phase_name(m.phase) << ',' << clean(m.flags) << '\n';
        spl_mf_params p;
        spl_mf_params_default(&p);
        p.J = J;
        p.epsilon = epsilon;
        p.g = g;
        p.B = c.B;
        p.psi = m.psi;
        double an = NAN, ex = NAN;
        if (spl_llg_analytic(&p, &an) != SPL_OK) an = NAN;
        if (spl_llg_canted_exact(&p, &ex) != SPL_OK) ex = NAN;
        os << num(c.T) << ',' << num(c.B) << ',' << num(m.psi) << ',' << num(to_ghz(m.omega.re)) << ','
           << num(to_ghz(m.omega.im)) << ',' << num(to_ghz(an)) << ',' << num(to_ghz(ex)) << '\n';
      }
    }
  }
};

// ---------------------------------------------------------------- shared model keys

struct ModelKeys {
  double alpha_N = 0.00441, gamma_phi_MHz = 4.8, gamma_inh_MHz = 9.2, N = 5e16;
  void attach(CLI::App* app) {
    app->add_option("--alpha_N", alpha_N, "2 pi alpha N")->capture_default_str();
    app->add_option("--gamma_phi_MHz", gamma_phi_MHz, "intrinsic linewidth")->capture_default_str();
    app->add_option("--gamma_inh_MHz", gamma_inh_MHz, "inhomogeneous linewidth")->capture_default_str();
    app->add_option("--N", N, "spin count")->capture_default_str();
  }
  spl_coupling_model get() const { return {alpha_N, gamma_phi_MHz * 1e6, gamma_inh_MHz * 1e6, N}; }
};

// ---------------------------------------------------------------- transmit

struct Transmit {
  Grid T{"0.01,1.5"}, B{"0.125"}, f{"auto"}, visibility_T;
  std::string model = "powder", statistics = "magnon";
  double J = 0.7, epsilon = -0.086, g = 2.004, gilbert = -1.0, visibility_B = 0.0;
  int nodes = 64, points = 4001;
  bool broadening = false;
  ModelKeys mk;

  void attach(CLI::App* app) {
    grid_option(app, "T", T, "temperatures (K)");
    grid_option(app, "B", B, "fields (T)");
    grid_option(app, "f", f, "frequencies (GHz) or auto");
    grid_option(app, "visibility_T", visibility_T, "temperatures for the visibility table");
    app->add_option("--model", model, "paramagnetic or powder")->capture_default_str();
    app->add_option("--statistics", statistics, "magnon or classical_mf")->capture_default_str();
    app->add_option("--J", J, "exchange (K)")->capture_default_str();
    app->add_option("--epsilon", epsilon, "anisotropy")->capture_default_str();
    app->add_option("--g", g, "g factor")->capture_default_str();
    app->add_option("--gilbert", gilbert, "Gilbert damping, < 0 derives it from Gamma")->capture_default_str();
    app->add_option("--nodes", nodes, "psi quadrature nodes")->capture_default_str();
    app->add_option("--points", points, "frequency points for f = auto")->capture_default_str();
    app->add_option("--broadening", broadening, "visibility from powder spectra")->capture_default_str();
    app->add_option("--visibility_B", visibility_B, "field for the visibility table, 0: first B")
        ->capture_default_str();
    mk.attach(app);
  }

  spl_powder_options options() const {
    spl_powder_options o;
    spl_powder_options_default(&o);
    o.nodes = nodes;
    o.statistics = statistics == "magnon" ? SPL_MAGNON : SPL_CLASSICAL_MF;
    o.gilbert = gilbert;
    o.jobs = 1;
    return o;
  }

  void run(Context& ctx) {
    const auto Ts = parse_grid(grid_text(T), "T");
    const auto Bs = parse_grid(grid_text(B), "B");
    const bool auto_f = grid_text(f) == "auto";
    std::vector<double> fixed;
    if (!auto_f)
      for (double x : parse_grid(grid_text(f), "f")) fixed.push_back(x * 1e9);
    if (!one_of(model, {"paramagnetic", "powder"})) throw UsageError("model must be paramagnetic or powder");
    if (!one_of(statistics, {"magnon", "classical_mf"})) throw UsageError("statistics must be magnon or classical_mf");
    if (points < 3) throw UsageError("points must be >= 3");
    const spl_coupling_model m = mk.get();
    const spl_powder_options opt = options();

    struct Cell {
      double T, B;
      std::vector<double> f;
      std::vector<spl_complex> s21, s11;
      std::vector<std::pair<std::string, std::string>> params;
      std::string model;
      spl_line_metrics metrics{NAN, NAN, NAN};
      spl_line_stats stats{NAN, NAN, NAN, NAN};
      std::string error;
    };
    std::vector<Cell> cells;
    for (double t : Ts)
      for (double b : Bs) cells.push_back({t, b, {}, {}, {}, {}, {}, {}, {}, {}});

    parallel_for(cells.size(), ctx.g.jobs, [&](std::size_t i) {
      Cell& c = cells[i];
      spl_mf_params p;
      spl_mf_params_default(&p);
      p.J = J;
      p.epsilon = epsilon;
      p.g = g;
      p.B = c.B;
      p.T = c.T;
      spl_spectrum* s = nullptr;
      spl_status st = SPL_OK;
      if (model == "paramagnetic") {
        double fz = 0, G = 0, Gam = 0;
        st = spl_zeeman_frequency(c.B, g, &fz);
        if (st == SPL_OK) st = spl_collective_coupling(&m, fz, c.T, &G);
        if (st == SPL_OK) st = spl_gamma_total(&m, fz, c.T, &Gam);
        if (st == SPL_OK) {
          c.f = fixed;
          if (auto_f) {
            const double lo = std::max(0.0, fz - 20.0 * (G + Gam)), hi = fz + 20.0 * (G + Gam);
            for (int k = 0; k < points; ++k) c.f.push_back(lo + (hi - lo) * k / (points - 1));
          }
          st = spl_paramagnetic_spectrum(c.f.data(), c.f.size(), fz, G, Gam, &s);
          c.stats = {fz, 0.0, 0.0, 0.0};
        }
      } else {
        if (auto_f) {
          c.f.resize(static_cast<std::size_t>(points));
          st = spl_powder_grid(&p, &m, &opt, c.f.size(), c.f.data());
        } else {
          c.f = fixed;
        }
        if (st == SPL_OK) st = spl_powder_spectrum(c.f.data(), c.f.size(), &p, &m, &opt, &s);
        if (st == SPL_OK) st = spl_powder_line_stats(&p, &m, &opt, &c.stats);
      }
      if (st != SPL_OK) {
        c.error = spl_last_error();
        spl_spectrum_free(s);
        return;
      }
      c.model = spl_spectrum_model(s);
      for (std::size_t k = 0; k < spl_spectrum_size(s); ++k) {
        spl_complex a, b;
        spl_spectrum_point(s, k, nullptr, &a, &b);
        c.s21.push_back(a);
        c.s11.push_back(b);
      }
      for (std::size_t k = 0; k < spl_spectrum_param_count(s); ++k) {
        const char *key = nullptr, *val = nullptr;
        spl_spectrum_param(s, k, &key, &val);
        c.params.emplace_back(key, val);
      }
      spl_spectrum_free(s);
      if (spl_extract_line_metrics(c.f.data(), c.s21.data(), c.f.size(), &c.metrics) != SPL_OK)
        c.metrics = {NAN, NAN, NAN};
    });

    auto os = ctx.open("transmit_summary.csv");
    os << "T_K,B_T,center_GHz,fwhm_MHz,visibility,mean_center_GHz,relative_shift,spread_MHz,excess_broadening_MHz\n";
    for (const Cell& c : cells) {
      if (!c.error.empty()) {
        ctx.error("T=" + num(c.T) + " B=" + num(c.B), c.error);
        os << num(c.T) << ',' << num(c.B) << ",nan,nan,nan,nan,nan,nan,nan\n";
        continue;
      }
      os << num(c.T) << ',' << num(c.B) << ',' << num(c.metrics.center / 1e9) << ',' << num(c.metrics.fwhm / 1e6)
         << ',' << num(c.metrics.visibility) << ',' << num(c.stats.center / 1e9) << ','
         << num(c.stats.relative_shift) << ',' << num(c.stats.spread / 1e6) << ','
         << num(c.stats.excess_broadening / 1e6) << '\n';
      auto o = ctx.open("spectrum_T" + tag(c.T) + "_B" + tag(c.B) + ".csv");
      o << "# T_K=" << num(c.T) << "\n# B_T=" << num(c.B) << "\n# model=" << c.model << "\n";
      for (const auto& [k, v] : c.params) o << "# " << k << "=" << v << "\n";
      o << "f_GHz,re_s21,im_s21,abs_s21,phase_s21_rad,re_s11,im_s11\n";
      for (std::size_t k = 0; k < c.f.size(); ++k) {
        const auto& a = c.s21[k];
        o << num(c.f[k] / 1e9) << ',' << num(a.re) << ',' << num(a.im) << ',' << num(std::hypot(a.re, a.im)) << ','
          << num(std::atan2(a.im, a.re)) << ',' << num(c.s11[k].re) << ',' << num(c.s11[k].im) << '\n';
      }
    }

    if (!visibility_T.empty()) {
      const auto vT = parse_grid(grid_text(visibility_T), "visibility_T");
      spl_mf_params p;
      spl_mf_params_default(&p);
      p.J = J;
      p.epsilon = epsilon;
      p.g = g;
      p.B = visibility_B > 0.0 ? visibility_B : Bs.front();
      std::vector<double> em(vT.size()), ec(vT.size());
      auto ov = ctx.open("visibility.csv");
      ov << "T_K,B_T,eta_magnon,eta_classical_mf\n";
      if (spl_visibility_vs_temperature(SPL_MAGNON, vT.data(), vT.size(), &p, &m, broadening, &opt, em.data()) !=
              SPL_OK ||
          spl_visibility_vs_temperature(SPL_CLASSICAL_MF, vT.data(), vT.size(), &p, &m, broadening, &opt,
                                        ec.data()) != SPL_OK) {
        ctx.error("visibility", spl_last_error());
        return;
      }
      for (std::size_t k = 0; k < vT.size(); ++k)
        ov << num(vT[k]) << ',' << num(p.B) << ',' << num(em[k]) << ',' << num(ec[k]) << '\n';
    }
  }
};

// ---------------------------------------------------------------- synthesize

struct Synthesize {
  Grid f{"13.4:14.6:2401"}, B{"0.485,0.5"};
  double T = 2.0, noise = 0.01, J = 0.7, epsilon = -0.086, g = 2.004;
  std::string line = "paramagnetic", output = "raw_sweep.csv";
  bool unit_background = false, include_s11 = true;
  int nodes = 64;
  ModelKeys mk;

  void attach(CLI::App* app) {
    grid_option(app, "f", f, "frequencies (GHz)");
    grid_option(app, "B", B, "fields (T)");
    app->add_option("--T", T, "temperature (K)")->capture_default_str();
    app->add_option("--noise", noise, "Gaussian noise on Re and Im")->capture_default_str();
    app->add_option("--line", line, "paramagnetic or powder")->capture_default_str();
    app->add_option("--J", J, "exchange (K)")->capture_default_str();
    app->add_option("--epsilon", epsilon, "anisotropy")->capture_default_str();
    app->add_option("--g", g, "g factor")->capture_default_str();
    app->add_option("--nodes", nodes, "psi quadrature nodes")->capture_default_str();
    app->add_option("--unit_background", unit_background, "skip the background")->capture_default_str();
    app->add_option("--include_s11", include_s11, "emit reflection columns")->capture_default_str();
    app->add_option("--output", output, "file name inside --out")->capture_default_str();
    mk.attach(app);
  }

  void run(Context& ctx) {
    std::vector<double> fs_;
    for (double x : parse_grid(grid_text(f), "f")) fs_.push_back(x * 1e9);
    const auto Bs = parse_grid(grid_text(B), "B");
    if (!one_of(line, {"paramagnetic", "powder"})) throw UsageError("line must be paramagnetic or powder");
    spl_synth_config c;
    spl_synth_config_default(&c);
    c.T = T;
    c.model = mk.get();
    c.powder = line == "powder";
    c.chain.J = J;
    c.chain.epsilon = epsilon;
    c.chain.g = g;
    c.unit_background = unit_background;
    c.noise = noise;
    c.seed = ctx.g.seed;
    c.include_s11 = include_s11;
    c.nodes = nodes;
    spl_sweep* s = nullptr;
    check(spl_synthesize(&c, fs_.data(), fs_.size(), Bs.data(), Bs.size(), &s), "synthesize");
    std::unique_ptr<spl_sweep, void (*)(spl_sweep*)> guard(s, spl_sweep_free);
    fs::create_directories(ctx.g.out);
    const std::string path = (fs::path(ctx.g.out) / output).string();
    check(spl_sweep_write(s, path.c_str()), "write");
    // prepend provenance; the sweep reader skips '#' lines
    std::ifstream in(path);
    std::stringstream body;
    body << in.rdbuf();
    in.close();
    auto o = ctx.open(output);
    o << body.str();
  }
};

// ---------------------------------------------------------------- normalize-fit

struct NormalizeFit {
  std::string input;
  Grid fields{"all"}, window_GHz;
  double dB = -0.015, g = 2.004, T = -1.0;
  bool amplitude_only = false, reference_model = true, coupling_law = true;
  std::string weighting = "relative";

  void attach(CLI::App* app) {
    app->add_option("--input", input, "raw sweep CSV")->capture_default_str();
    grid_option(app, "fields", fields, "fields to fit (T) or all");
    grid_option(app, "window_GHz", window_GHz, "fit window lo,hi in GHz");
    app->add_option("--dB", dB, "reference field offset (T)")->capture_default_str();
    app->add_option("--g", g, "g factor")->capture_default_str();
    app->add_option("--T", T, "temperature override (K), < 0 keeps the file value")->capture_default_str();
    app->add_option("--amplitude_only", amplitude_only)->capture_default_str();
    app->add_option("--reference_model", reference_model, "model the resonance in the reference trace")
        ->capture_default_str();
    app->add_option("--coupling_law", coupling_law, "fit the tanh law to the results")->capture_default_str();
    app->add_option("--weighting", weighting, "relative or uniform")->capture_default_str();
  }

  void run(Context& ctx) {
    if (input.empty()) throw UsageError("normalize-fit needs --input");
    if (!one_of(weighting, {"relative", "uniform"})) throw UsageError("weighting must be relative or uniform");
    spl_sweep* raw = nullptr;
    check(spl_sweep_read(input.c_str(), &raw), "read " + input);
    std::unique_ptr<spl_sweep, void (*)(spl_sweep*)> guard(raw, spl_sweep_free);
    if (T >= 0.0) spl_sweep_set_temperature(raw, T);
    const double temp = spl_sweep_temperature(raw);
    size_t nB = 0;
    spl_sweep_dims(raw, nullptr, &nB, nullptr);
    std::vector<double> all(nB);
    for (size_t i = 0; i < nB; ++i) spl_sweep_field(raw, i, &all[i]);
    std::vector<double> targets;
    if (grid_text(fields) == "all") {
      for (double b : all)
        for (double r : all)
          if (std::abs(r - (b + dB)) <= 1e-9 * std::max(1.0, std::abs(b))) targets.push_back(b);
    } else {
      targets = parse_grid(grid_text(fields), "fields");
    }
    spl_fit_options fo;
    spl_fit_options_default(&fo);
    fo.amplitude_only = amplitude_only;
    fo.reference_model = reference_model;
    if (!window_GHz.empty()) {
      const auto w = parse_grid(grid_text(window_GHz), "window_GHz");
      if (w.size() != 2 || !(w[0] < w[1])) throw UsageError("window_GHz must be lo,hi");
      fo.has_window = 1;
      fo.window_lo = w[0] * 1e9;
      fo.window_hi = w[1] * 1e9;
    }

    struct Cell {
      double B;
      spl_fit_result r{};
      std::string error;
    };
    std::vector<Cell> cells;
    for (double b : targets) cells.push_back({b, {}, {}});
    parallel_for(cells.size(), ctx.g.jobs, [&](std::size_t i) {
      Cell& c = cells[i];
      spl_normalized* n = nullptr;
      if (spl_normalize_transmission(raw, c.B, dB, g, &n) != SPL_OK) {
        c.error = spl_last_error();
        return;
      }
      if (spl_fit_normalized(n, &fo, &c.r) != SPL_OK) c.error = spl_last_error();
      spl_normalized_free(n);
    });

    auto o = ctx.open("fits.csv");
    o << "# input=" << input << "\n# dB_T=" << num(dB) << "\n";
    o << "T_K,B_T,G_over_2pi_MHz,Gamma_over_2pi_MHz,Omega_GHz,eta,err_G,err_Gamma,err_Omega,converged\n";
    std::vector<spl_coupling_point> pts;
    for (const Cell& c : cells) {
      if (!c.error.empty()) {
        ctx.error("B=" + num(c.B), c.error);
        o << num(temp) << ',' << num(c.B) << ",nan,nan,nan,nan,nan,nan,nan,false\n";
        continue;
      }
      const auto& r = c.r;
      if (r.warnings[0]) std::cerr << "B=" << num(c.B) << ": " << r.warnings << "\n";
      o << num(temp) << ',' << num(c.B) << ',' << num(r.G / 1e6) << ',' << num(r.Gamma / 1e6) << ','
        << num(r.Omega / 1e9) << ',' << num(r.eta) << ',' << num(r.errors[0] / 1e6) << ','
        << num(r.errors[1] / 1e6) << ',' << num(r.errors[2] / 1e9) << ',' << (r.converged ? "true" : "false") << '\n';
      if (r.converged && temp > 0.0) pts.push_back({c.B, temp, r.G});
    }
    if (coupling_law && !pts.empty()) {
      spl_coupling_fit cf;
      auto oc = ctx.open("coupling_law.csv");
      oc << "alpha_N,uncertainty,ci95,residual,points\n";
      if (spl_fit_coupling_law(pts.data(), pts.size(), g, weighting == "relative", &cf) != SPL_OK) {
        ctx.error("coupling_law", spl_last_error());
        return;
      }
      oc << num(cf.alpha_N) << ',' << num(cf.uncertainty) << ',' << num(cf.ci95) << ',' << num(cf.residual) << ','
         << cf.points << '\n';
    }
  }
};

int default_jobs() {
  const unsigned n = std::thread::hardware_concurrency();
  return n > 0 ? static_cast<int>(n) : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spinline: spin-chain thermodynamics, mean-field resonance and waveguide transmission"};
  app.set_config("--config", "", "key = value file with one section per command");
  Global g;
  app.add_option("--out", g.out, "output directory")->capture_default_str();
  app.add_option("--jobs", g.jobs, "worker threads (default: SPINLINE_JOBS, then all cores)")
      ->envname("SPINLINE_JOBS")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--seed", g.seed, "random seed")->capture_default_str();
  app.require_subcommand(1);

  EdThermo ed;
  MfPhase mfp;
  Resonance res;
  Transmit tr;
  Synthesize syn;
  NormalizeFit nf;
  std::vector<std::pair<CLI::App*, std::function<void(Context&)>>> cmds;
  auto add = [&](const char* name, const char* help, auto& cmd) {
    CLI::App* sub = app.add_subcommand(name, help);
    cmd.attach(sub);
    cmds.emplace_back(sub, [&cmd](Context& c) { cmd.run(c); });
  };
  add("ed-thermo", "exact-diagonalization thermodynamics of short chains", ed);
  add("mf-phase", "mean-field phase diagram", mfp);
  add("resonance", "powder distribution of spin-wave frequencies", res);
  add("transmit", "transmission spectra over temperature and field", tr);
  add("synthesize", "synthetic raw VNA sweep", syn);
  add("normalize-fit", "normalize a raw sweep and fit each field", nf);

  CLI11_PARSE(app, argc, argv);
  if (g.jobs == 0) g.jobs = default_jobs();

  for (auto& [sub, run] : cmds) {
    if (!sub->parsed()) continue;
    Context ctx{g, {}, {}, {}};
    ctx.prov.command = sub->get_name();
    // jobs and out do not change results, so they stay out of the hash
    ctx.prov.config_hash = hex(fnv1a(sub->get_name() + "\n" + sub->config_to_str(true, false) +
                                     "seed=" + std::to_string(g.seed) + "\n"));
    ctx.prov.seed = g.seed;
    try {
      run(ctx);
    } catch (const UsageError& e) {
      std::cerr << "spinline " << sub->get_name() << ": " << e.what() << "\n";
      return 2;
    } catch (const std::exception& e) {
      std::cerr << "spinline " << sub->get_name() << ": " << e.what() << "\n";
      return 3;
    }
    if (!ctx.errors.empty()) {
      std::cerr << ctx.errors.size() << " failed cell(s):\n";
      for (const auto& e : ctx.errors) std::cerr << "  " << e.cell << ": " << e.message << "\n";
      return 1;
    }
  }
  return 0;
}
