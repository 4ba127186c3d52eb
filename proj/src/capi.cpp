#include "spinline/spinline.h"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <new>
#include <string>

#include "spinline/chain_ed.hpp"
#include "spinline/constants.hpp"
#include "spinline/error.hpp"
#include "spinline/fitfmt.hpp"
#include "spinline/llg.hpp"
#include "spinline/meanfield.hpp"
#include "spinline/transmission.hpp"

struct spl_thermo {
  spinline::ThermoResult r;
};
struct spl_phase_map {
  std::vector<spinline::PhaseCell> cells;
};
struct spl_spectrum {
  spinline::Spectrum s;
};
struct spl_sweep {
  spinline::RawSweep s;
};
struct spl_normalized {
  spinline::NormalizedSpectrum n;
};

namespace {

using namespace spinline;

thread_local std::string g_error;

spl_status set_error(spl_status st, const char* msg) {
  g_error = msg;
  return st;
}

template <class F>
spl_status guard(F&& f) {
  try {
    f();
    g_error.clear();
    return SPL_OK;
  } catch (const Error& e) {
    return set_error(static_cast<spl_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(SPL_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(SPL_ERR_INTERNAL, e.what());
  } catch (...) {
    return set_error(SPL_ERR_INTERNAL, "unknown error");
  }
}

void need(const void* p, const char* what) {
  if (!p) fail(Errc::invalid_argument, std::string(what) + " is NULL");
}

spl_complex to_c(cplx z) { return {z.real(), z.imag()}; }
cplx from_c(spl_complex z) { return {z.re, z.im}; }

ChainSpec chain(const spl_chain_params* p) {
  need(p, "chain params");
  ChainSpec c;
  c.n_spins = p->n_spins;
  c.J = p->J;
  c.epsilon = p->epsilon;
  c.psi = p->psi;
  c.g = p->g;
  c.boundary = p->periodic ? Boundary::periodic : Boundary::open;
  return c;
}

MFParams mf(const spl_mf_params* p) {
  need(p, "mean-field params");
  MFParams q;
  q.J = p->J;
  q.epsilon = p->epsilon;
  q.psi = p->psi;
  q.g = p->g;
  q.B = p->B;
  q.T = p->T;
  return q;
}

CouplingModel model(const spl_coupling_model* m) {
  CouplingModel c;
  if (m) {
    c.alpha_N = m->alpha_N;
    c.gamma_phi = m->gamma_phi;
    c.gamma_inh = m->gamma_inh;
    c.N = m->N;
  }
  return c;
}

PowderOptions powder(const spl_powder_options* o) {
  PowderOptions p;
  if (o) {
    p.nodes = o->nodes;
    p.statistics = o->statistics == SPL_CLASSICAL_MF ? Statistics::classical_mf : Statistics::magnon;
    p.gilbert = o->gilbert;
    p.jobs = o->jobs;
  }
  return p;
}

spl_mf_state state(const MFState& s) {
  return {s.M1, s.M2, s.theta1, s.theta2, s.phi1, s.phi2, s.dtheta(), s.free_energy, s.residual,
          static_cast<spl_phase>(s.phase)};
}

std::vector<double> vec(const double* x, size_t n, const char* what) {
  if (n > 0) need(x, what);
  return std::vector<double>(x, x + n);
}

FitOptions fit_options(const spl_fit_options* o) {
  FitOptions f;
  if (!o) return f;
  if (o->has_window) f.window = std::pair(o->window_lo, o->window_hi);
  if (o->has_initial) f.initial = std::array<double, 3>{o->initial[0], o->initial[1], o->initial[2]};
  f.amplitude_only = o->amplitude_only != 0;
  f.reference_model = o->reference_model != 0;
  f.max_iter = o->max_iter;
  f.rel_tol = o->rel_tol;
  return f;
}

void fill(const FitResult& f, spl_fit_result* r) {
  r->G = f.G;
  r->Gamma = f.Gamma;
  r->Omega = f.Omega;
  r->eta = f.eta;
  for (int i = 0; i < 9; ++i) r->covariance[i] = f.covariance(i / 3, i % 3);
  const auto e = f.errors();
  for (int i = 0; i < 3; ++i) r->errors[i] = e[i];
  r->residual_rms = f.residual_rms;
  r->converged = f.converged;
  r->iterations = f.iterations;
  r->points = f.points;
  std::string w;
  for (const auto& s : f.warnings) w += (w.empty() ? "" : "; ") + s;
  std::snprintf(r->warnings, sizeof r->warnings, "%s", w.c_str());
}

template <class T>
void out_handle(T** out, T* h) {
  *out = h;
}

}  // namespace

extern "C" {

const char* spl_last_error(void) { return g_error.c_str(); }
const char* spl_version(void) { return "1.0.0"; }
const char* spl_constant_set(void) { return kConstantSet; }

spl_status spl_zeeman_frequency(double B, double g, double* f) {
  return guard([&] { need(f, "output"); *f = zeeman_frequency(B, g); });
}
spl_status spl_hz_to_kelvin(double f, double* k) {
  return guard([&] { need(k, "output"); *k = hz_to_kelvin(f); });
}
spl_status spl_kelvin_to_hz(double k, double* f) {
  return guard([&] { need(f, "output"); *f = kelvin_to_hz(k); });
}
spl_status spl_bose_occupation(double f, double T, double* n) {
  return guard([&] { need(n, "output"); *n = bose_occupation(f, T); });
}
spl_status spl_spin_polarization(double f, double T, double* p) {
  return guard([&] { need(p, "output"); *p = spin_polarization(f, T); });
}

void spl_chain_params_default(spl_chain_params* p) {
  if (!p) return;
  const ChainSpec c;
  *p = {c.n_spins, c.J, c.epsilon, c.psi, c.g, 0};
}

spl_status spl_chain_spectrum(const spl_chain_params* p, double B, double* ev, size_t capacity, size_t* count) {
  return guard([&] {
    need(count, "count");
    const auto s = solve_chain(chain(p), B);
    *count = static_cast<size_t>(s.dim());
    if (capacity > 0) need(ev, "eigenvalues");
    for (size_t i = 0; i < std::min(capacity, *count); ++i) ev[i] = s.eigenvalues(static_cast<Eigen::Index>(i));
  });
}

spl_status spl_chain_thermo(const spl_chain_params* p, double B, const double* T, size_t nT, int powder_nodes,
                            spl_thermo** out) {
  return guard([&] {
    need(out, "output");
    const auto c = chain(p);
    const auto Ts = vec(T, nT, "temperatures");
    auto h = std::make_unique<spl_thermo>();
    if (powder_nodes > 0)
      h->r = powder_average_thermo(c, Ts, B, powder_nodes);
    else
      h->r = thermo_sweep(solve_chain(c, B), Ts, kAxisY);
    out_handle(out, h.release());
  });
}

size_t spl_thermo_size(const spl_thermo* t) { return t ? t->r.temperatures.size() : 0; }

spl_status spl_thermo_row_at(const spl_thermo* t, size_t i, spl_thermo_row* row) {
  return guard([&] {
    need(t, "thermo");
    need(row, "row");
    require(i < t->r.temperatures.size(), "row index out of range");
    *row = {t->r.temperatures[i], t->r.specific_heat[i], t->r.chi[i],
            t->r.chi_T[i],        t->r.magnetization[i], t->r.correlator_xx[i]};
  });
}

void spl_thermo_free(spl_thermo* t) { delete t; }

spl_status spl_dilution_weights(double p, int n_max, double* w) {
  return guard([&] {
    need(w, "weights");
    const auto v = dilution_weights(p, n_max);
    std::copy(v.begin(), v.end(), w);
  });
}

void spl_composite_default(spl_composite* c) {
  if (!c) return;
  const CompositeModel m;
  *c = {m.dimer_J, m.chain_J, m.radical_fraction, m.g, m.B, nullptr, 0};
}

spl_status spl_composite_chiT(const spl_composite* c, const double* T, size_t nT, double* chiT) {
  return guard([&] {
    need(c, "composite");
    need(chiT, "output");
    CompositeModel m;
    m.dimer_J = c->dimer_J;
    m.chain_J = c->chain_J;
    m.radical_fraction = c->radical_fraction;
    m.g = c->g;
    m.B = c->B;
    if (c->length_weights) m.length_weights = vec(c->length_weights, c->n_weights, "weights");
    const auto v = composite_chiT(m, vec(T, nT, "temperatures"));
    std::copy(v.begin(), v.end(), chiT);
  });
}

spl_status spl_chiT_to_emu(double chiT, double g, double* emu) {
  return guard([&] { need(emu, "output"); *emu = chiT_to_emu(chiT, g); });
}

void spl_mf_params_default(spl_mf_params* p) {
  if (!p) return;
  const MFParams m;
  *p = {m.J, m.epsilon, m.psi, m.g, m.B, m.T};
}

const char* spl_phase_name(spl_phase p) { return phase_name(static_cast<Phase>(p)); }

spl_status spl_mf_solve(const spl_mf_params* p, spl_mf_state* s) {
  return guard([&] { need(s, "output"); *s = state(solve_equilibrium(mf(p))); });
}
spl_status spl_mf_critical_field(const spl_mf_params* p, double* B) {
  return guard([&] { need(B, "output"); *B = critical_field(mf(p)); });
}
spl_status spl_mf_spin_flop_field(const spl_mf_params* p, double* B) {
  return guard([&] { need(B, "output"); *B = spin_flop_field(mf(p)); });
}
spl_status spl_mf_neel_temperature(const spl_mf_params* p, double* T) {
  return guard([&] { need(T, "output"); *T = neel_temperature(mf(p)); });
}

spl_status spl_mf_phase_map(const spl_mf_params* tmpl, const double* T, size_t nT, const double* B, size_t nB,
                            int jobs, spl_phase_map** out) {
  return guard([&] {
    need(out, "output");
    auto h = std::make_unique<spl_phase_map>();
    h->cells = phase_diagram(mf(tmpl), vec(T, nT, "temperatures"), vec(B, nB, "fields"), jobs);
    out_handle(out, h.release());
  });
}

size_t spl_phase_map_size(const spl_phase_map* m) { return m ? m->cells.size() : 0; }

spl_status spl_phase_map_cell(const spl_phase_map* m, size_t i, double* T, double* B, spl_mf_state* s) {
  std::string err;
  const spl_status st = guard([&] {
    need(m, "phase map");
    require(i < m->cells.size(), "cell index out of range");
    const auto& c = m->cells[i];
    if (T) *T = c.T;
    if (B) *B = c.B;
    if (s) *s = state(c.state);
    if (!c.ok) err = c.error;
  });
  if (st == SPL_OK && !err.empty()) return set_error(SPL_ERR_NO_CONVERGENCE, err.c_str());
  return st;
}

void spl_phase_map_free(spl_phase_map* m) { delete m; }

spl_status spl_llg_modes(const spl_mf_params* p, double gilbert, spl_modes* out) {
  return guard([&] {
    need(out, "output");
    const auto r = resonance_at(mf(p), gilbert);
    *out = {};
    out->count = std::min<size_t>(4, r.omegas.size());
    for (size_t i = 0; i < out->count; ++i) out->omegas[i] = to_c(r.omegas[i]);
    out->selected = to_c(r.selected);
    out->has_selected = r.has_selected;
    out->defective = r.defective;
    out->condition = r.condition;
  });
}

spl_status spl_llg_analytic(const spl_mf_params* p, double* w) {
  return guard([&] { need(w, "output"); *w = analytic_resonance(mf(p)); });
}
spl_status spl_llg_canted_exact(const spl_mf_params* p, double* w) {
  return guard([&] { need(w, "output"); *w = canted_resonance_exact(mf(p)); });
}
spl_status spl_gilbert_from_linewidth(double gamma_hz, double B, double g, double* out) {
  return guard([&] { need(out, "output"); *out = gilbert_from_linewidth(gamma_hz, B, g); });
}

spl_status spl_powder_modes(const spl_mf_params* p, double gilbert, int nodes, int jobs, spl_mode_node* out) {
  return guard([&] {
    need(out, "output");
    const auto v = powder_mode_distribution(mf(p), gilbert, nodes, jobs);
    for (size_t i = 0; i < v.size(); ++i) {
      out[i].psi = v[i].psi;
      out[i].weight = v[i].weight;
      out[i].omega = to_c(v[i].omega);
      out[i].phase = static_cast<spl_phase>(v[i].phase);
      out[i].ok = v[i].ok;
      std::snprintf(out[i].flags, sizeof out[i].flags, "%s", v[i].flags.c_str());
    }
  });
}

void spl_coupling_model_default(spl_coupling_model* m) {
  if (!m) return;
  const CouplingModel c;
  *m = {c.alpha_N, c.gamma_phi, c.gamma_inh, c.N};
}

void spl_powder_options_default(spl_powder_options* o) {
  if (!o) return;
  const PowderOptions p;
  *o = {p.nodes, SPL_MAGNON, p.gilbert, p.jobs};
}

spl_status spl_collective_coupling(const spl_coupling_model* m, double f, double T, double* G) {
  return guard([&] { need(G, "output"); *G = collective_coupling(model(m), f, T); });
}
spl_status spl_gamma_total(const spl_coupling_model* m, double f, double T, double* Gamma) {
  return guard([&] { need(Gamma, "output"); *Gamma = gamma_total(model(m), f, T); });
}
spl_status spl_visibility(double G, double Gamma, double* eta) {
  return guard([&] { need(eta, "output"); *eta = visibility(G, Gamma); });
}
spl_status spl_resonator_equivalent(double G, double f, double* out) {
  return guard([&] { need(out, "output"); *out = resonator_equivalent(G, f); });
}

#define SPL_SPECTRUM_RETURN(expr)                 \
  guard([&] {                                     \
    need(out, "output");                          \
    auto h = std::make_unique<spl_spectrum>();    \
    h->s = (expr);                                \
    out_handle(out, h.release());                 \
  })

spl_status spl_paramagnetic_spectrum(const double* f, size_t n, double Omega, double G, double Gamma,
                                     spl_spectrum** out) {
  return SPL_SPECTRUM_RETURN(paramagnetic_s_params(vec(f, n, "frequencies"), Omega, G, Gamma));
}

spl_status spl_single_spin_spectrum(const double* f, size_t n, double Omega, double g, double Gamma,
                                    spl_spectrum** out) {
  return SPL_SPECTRUM_RETURN(single_spin_s_params(vec(f, n, "frequencies"), Omega, g, Gamma));
}

spl_status spl_ensemble_spectrum(const double* f, size_t n, const double* Omegas, const double* g, size_t n_spins,
                                 double Gamma, spl_spectrum** out) {
  return guard([&] {
    need(out, "output");
    const auto om = vec(Omegas, n_spins, "Omegas");
    const auto gs = vec(g, n_spins, "couplings");
    std::vector<SpinLine> spins;
    for (size_t i = 0; i < n_spins; ++i) spins.push_back({om[i], gs[i]});
    auto h = std::make_unique<spl_spectrum>();
    h->s = ensemble_s_params(vec(f, n, "frequencies"), spins, Gamma);
    out_handle(out, h.release());
  });
}

spl_status spl_powder_spectrum(const double* f, size_t n, const spl_mf_params* p, const spl_coupling_model* m,
                               const spl_powder_options* o, spl_spectrum** out) {
  return SPL_SPECTRUM_RETURN(powder_spinwave_s21(vec(f, n, "frequencies"), mf(p), model(m), powder(o)));
}

spl_status spl_powder_grid(const spl_mf_params* p, const spl_coupling_model* m, const spl_powder_options* o,
                           size_t points, double* f) {
  return guard([&] {
    need(f, "output");
    const auto v = powder_grid(mf(p), model(m), powder(o), static_cast<int>(points));
    std::copy(v.begin(), v.end(), f);
  });
}

spl_status spl_powder_line_stats(const spl_mf_params* p, const spl_coupling_model* m, const spl_powder_options* o,
                                 spl_line_stats* out) {
  return guard([&] {
    need(out, "output");
    const auto s = powder_line_stats(powder_lines(mf(p), model(m), powder(o)));
    *out = {s.center, s.relative_shift, s.spread, s.excess_broadening};
  });
}

spl_status spl_visibility_vs_temperature(spl_statistics s, const double* T, size_t nT, const spl_mf_params* p,
                                         const spl_coupling_model* m, int broadening, const spl_powder_options* o,
                                         double* eta) {
  return guard([&] {
    need(eta, "output");
    const auto v = visibility_vs_temperature(s == SPL_CLASSICAL_MF ? Statistics::classical_mf : Statistics::magnon,
                                             vec(T, nT, "temperatures"), mf(p), model(m), broadening != 0,
                                             powder(o));
    std::copy(v.begin(), v.end(), eta);
  });
}

size_t spl_spectrum_size(const spl_spectrum* s) { return s ? s->s.frequencies.size() : 0; }

spl_status spl_spectrum_point(const spl_spectrum* s, size_t i, double* f, spl_complex* s21, spl_complex* s11) {
  return guard([&] {
    need(s, "spectrum");
    require(i < s->s.frequencies.size(), "point index out of range");
    if (f) *f = s->s.frequencies[i];
    if (s21) *s21 = to_c(s->s.s21[i]);
    if (s11) *s11 = to_c(s->s.s11[i]);
  });
}

const char* spl_spectrum_model(const spl_spectrum* s) { return s ? s->s.model.c_str() : ""; }
size_t spl_spectrum_param_count(const spl_spectrum* s) { return s ? s->s.params.size() : 0; }

spl_status spl_spectrum_param(const spl_spectrum* s, size_t i, const char** key, const char** value) {
  return guard([&] {
    need(s, "spectrum");
    require(i < s->s.params.size(), "parameter index out of range");
    if (key) *key = s->s.params[i].first.c_str();
    if (value) *value = s->s.params[i].second.c_str();
  });
}

void spl_spectrum_free(spl_spectrum* s) { delete s; }

void spl_synth_config_default(spl_synth_config* c) {
  if (!c) return;
  const SynthConfig s;
  spl_coupling_model_default(&c->model);
  spl_mf_params_default(&c->chain);
  c->T = s.T;
  c->powder = 0;
  const Background& b = s.background;
  c->background.amplitude = b.amplitude;
  for (int i = 0; i < 3; ++i) {
    c->background.ripple_amp[i] = b.ripple_amp[i];
    c->background.ripple_period[i] = b.ripple_period[i];
    c->background.ripple_phase[i] = b.ripple_phase[i];
  }
  c->background.delay = b.delay;
  c->background.reflection = to_c(b.reflection);
  c->unit_background = s.unit_background;
  c->noise = s.noise;
  c->seed = s.seed;
  c->include_s11 = s.include_s11;
  c->nodes = s.nodes;
}

spl_status spl_synthesize(const spl_synth_config* c, const double* f, size_t nf, const double* B, size_t nB,
                          spl_sweep** out) {
  return guard([&] {
    need(c, "config");
    need(out, "output");
    SynthConfig s;
    s.frequencies = vec(f, nf, "frequencies");
    s.fields = vec(B, nB, "fields");
    s.T = c->T;
    s.model = model(&c->model);
    s.line = c->powder ? "powder" : "paramagnetic";
    s.chain = mf(&c->chain);
    s.background.amplitude = c->background.amplitude;
    for (int i = 0; i < 3; ++i) {
      s.background.ripple_amp[i] = c->background.ripple_amp[i];
      s.background.ripple_period[i] = c->background.ripple_period[i];
      s.background.ripple_phase[i] = c->background.ripple_phase[i];
    }
    s.background.delay = c->background.delay;
    s.background.reflection = from_c(c->background.reflection);
    s.unit_background = c->unit_background != 0;
    s.noise = c->noise;
    s.seed = c->seed;
    s.include_s11 = c->include_s11 != 0;
    s.nodes = c->nodes;
    auto h = std::make_unique<spl_sweep>();
    h->s = synthesize_sweep(s);
    out_handle(out, h.release());
  });
}

spl_status spl_sweep_read(const char* path, spl_sweep** out) {
  return guard([&] {
    need(path, "path");
    need(out, "output");
    auto h = std::make_unique<spl_sweep>();
    h->s = read_raw_sweep(std::string(path));
    out_handle(out, h.release());
  });
}

spl_status spl_sweep_write(const spl_sweep* s, const char* path) {
  return guard([&] {
    need(s, "sweep");
    need(path, "path");
    std::ofstream o(path);
    require(static_cast<bool>(o), std::string("cannot write ") + path, Errc::io);
    write_raw_sweep(o, s->s);
    require(static_cast<bool>(o), std::string("write failed: ") + path, Errc::io);
  });
}

spl_status spl_sweep_dims(const spl_sweep* s, size_t* nf, size_t* nB, int* has_s11) {
  return guard([&] {
    need(s, "sweep");
    if (nf) *nf = s->s.frequencies.size();
    if (nB) *nB = s->s.fields.size();
    if (has_s11) *has_s11 = s->s.has_s11();
  });
}

spl_status spl_sweep_frequency(const spl_sweep* s, size_t i, double* f) {
  return guard([&] {
    need(s, "sweep");
    need(f, "output");
    require(i < s->s.frequencies.size(), "frequency index out of range");
    *f = s->s.frequencies[i];
  });
}

spl_status spl_sweep_field(const spl_sweep* s, size_t i, double* B) {
  return guard([&] {
    need(s, "sweep");
    need(B, "output");
    require(i < s->s.fields.size(), "field index out of range");
    *B = s->s.fields[i];
  });
}

spl_status spl_sweep_value(const spl_sweep* s, size_t iB, size_t iF, spl_complex* s21, spl_complex* s11) {
  return guard([&] {
    need(s, "sweep");
    require(iB < s->s.fields.size() && iF < s->s.frequencies.size(), "sweep index out of range");
    if (s21) *s21 = to_c(s->s.s21[iB][iF]);
    if (s11) *s11 = s->s.has_s11() ? to_c(s->s.s11[iB][iF]) : spl_complex{NAN, NAN};
  });
}

double spl_sweep_temperature(const spl_sweep* s) { return s ? s->s.temperature : NAN; }
void spl_sweep_set_temperature(spl_sweep* s, double T) {
  if (s) s->s.temperature = T;
}
void spl_sweep_free(spl_sweep* s) { delete s; }

spl_status spl_normalize_transmission(const spl_sweep* s, double B, double dB, double g, spl_normalized** out) {
  return guard([&] {
    need(s, "sweep");
    need(out, "output");
    auto h = std::make_unique<spl_normalized>();
    h->n = normalize_transmission(s->s, B, dB, g);
    out_handle(out, h.release());
  });
}

spl_status spl_normalize_reflection(const spl_sweep* s, double B, double dB, double g, double* amplitude) {
  return guard([&] {
    need(s, "sweep");
    need(amplitude, "output");
    const auto a = normalize_reflection(s->s, B, dB, g);
    std::copy(a.amplitude.begin(), a.amplitude.end(), amplitude);
  });
}

size_t spl_normalized_size(const spl_normalized* n) { return n ? n->n.frequencies.size() : 0; }

spl_status spl_normalized_point(const spl_normalized* n, size_t i, double* f, spl_complex* s21, int* valid) {
  return guard([&] {
    need(n, "normalized spectrum");
    require(i < n->n.frequencies.size(), "point index out of range");
    if (f) *f = n->n.frequencies[i];
    if (s21) *s21 = to_c(n->n.s21[i]);
    if (valid) *valid = n->n.valid[i];
  });
}

double spl_normalized_mirror(const spl_normalized* n) { return n ? n->n.mirror_center : NAN; }
size_t spl_normalized_warning_count(const spl_normalized* n) { return n ? n->n.warnings.size() : 0; }
const char* spl_normalized_warning(const spl_normalized* n, size_t i) {
  return n && i < n->n.warnings.size() ? n->n.warnings[i].c_str() : "";
}
void spl_normalized_free(spl_normalized* n) { delete n; }

void spl_fit_options_default(spl_fit_options* o) {
  if (!o) return;
  const FitOptions f;
  *o = {};
  o->amplitude_only = f.amplitude_only;
  o->reference_model = f.reference_model;
  o->max_iter = f.max_iter;
  o->rel_tol = f.rel_tol;
}

spl_status spl_fit_normalized(const spl_normalized* n, const spl_fit_options* o, spl_fit_result* r) {
  return guard([&] {
    need(n, "normalized spectrum");
    need(r, "output");
    fill(fit_resonance(n->n, fit_options(o)), r);
  });
}

spl_status spl_fit_spectrum(const double* f, const spl_complex* s21, size_t n, const spl_fit_options* o,
                            spl_fit_result* r) {
  return guard([&] {
    need(r, "output");
    if (n > 0) need(s21, "spectrum");
    std::vector<cplx> s(n);
    for (size_t i = 0; i < n; ++i) s[i] = from_c(s21[i]);
    fill(fit_resonance(vec(f, n, "frequencies"), s, fit_options(o)), r);
  });
}

spl_status spl_extract_line_metrics(const double* f, const spl_complex* s21, size_t n, spl_line_metrics* m) {
  return guard([&] {
    need(m, "output");
    if (n > 0) need(s21, "spectrum");
    std::vector<cplx> s(n);
    for (size_t i = 0; i < n; ++i) s[i] = from_c(s21[i]);
    const auto r = extract_line_metrics(vec(f, n, "frequencies"), s);
    *m = {r.center, r.fwhm, r.visibility};
  });
}

spl_status spl_fit_coupling_law(const spl_coupling_point* pts, size_t n, double g, int relative_weights,
                                spl_coupling_fit* out) {
  return guard([&] {
    need(out, "output");
    if (n > 0) need(pts, "points");
    std::vector<CouplingPoint> v;
    for (size_t i = 0; i < n; ++i) v.push_back({pts[i].B, pts[i].T, pts[i].G});
    const auto r = fit_coupling_law(v, g, relative_weights ? Weighting::relative : Weighting::uniform);
    *out = {r.alpha_N, r.uncertainty, r.ci95, r.residual, r.points};
  });
}

}  // extern "C"
