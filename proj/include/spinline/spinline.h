#ifndef SPINLINE_H
#define SPINLINE_H

/* C interface to the spinline library.  Every call returns an spl_status;
   on failure spl_last_error() holds a message for the calling thread.
   Frequencies are linear (Hz), fields in tesla, temperatures and energies
   in kelvin unless a name says otherwise. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define SPL_API __declspec(dllexport)
#else
#define SPL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum spl_status {
  SPL_OK = 0,
  SPL_ERR_INVALID_ARGUMENT = 1,
  SPL_ERR_DOMAIN = 2,
  SPL_ERR_NO_CONVERGENCE = 3,
  SPL_ERR_IO = 4,
  SPL_ERR_INTERNAL = 5
} spl_status;

typedef struct spl_complex {
  double re, im;
} spl_complex;

SPL_API const char* spl_last_error(void);
SPL_API const char* spl_version(void);
SPL_API const char* spl_constant_set(void);

/* ---- constants ---- */
SPL_API spl_status spl_zeeman_frequency(double B, double g, double* f_hz);
SPL_API spl_status spl_hz_to_kelvin(double f_hz, double* kelvin);
SPL_API spl_status spl_kelvin_to_hz(double kelvin, double* f_hz);
SPL_API spl_status spl_bose_occupation(double f_hz, double T, double* n);
SPL_API spl_status spl_spin_polarization(double f_hz, double T, double* p);

/* ---- exact diagonalization of short chains ---- */
typedef struct spl_chain_params {
  int n_spins;
  double J, epsilon, psi, g;
  int periodic;
} spl_chain_params;

typedef struct spl_thermo_row {
  double T, specific_heat, chi, chi_T, magnetization, correlator_xx;
} spl_thermo_row;

typedef struct spl_thermo spl_thermo;

SPL_API void spl_chain_params_default(spl_chain_params* p);
/* Eigenvalues (ascending, kelvin) for field B along y; *count receives the
   Hilbert-space dimension, at most `capacity` values are written. */
SPL_API spl_status spl_chain_spectrum(const spl_chain_params* p, double B, double* eigenvalues, size_t capacity,
                                      size_t* count);
/* Observables on a temperature grid.  powder_nodes > 0 averages over psi. */
SPL_API spl_status spl_chain_thermo(const spl_chain_params* p, double B, const double* T, size_t nT,
                                    int powder_nodes, spl_thermo** out);
SPL_API size_t spl_thermo_size(const spl_thermo* t);
SPL_API spl_status spl_thermo_row_at(const spl_thermo* t, size_t i, spl_thermo_row* row);
SPL_API void spl_thermo_free(spl_thermo* t);

SPL_API spl_status spl_dilution_weights(double p, int n_max, double* weights);
typedef struct spl_composite {
  double dimer_J, chain_J, radical_fraction, g, B;
  const double* length_weights; /* NULL: default dilution weights */
  size_t n_weights;
} spl_composite;
SPL_API void spl_composite_default(spl_composite* c);
SPL_API spl_status spl_composite_chiT(const spl_composite* c, const double* T, size_t nT, double* chiT);
SPL_API spl_status spl_chiT_to_emu(double chiT, double g, double* emu);

/* ---- two-sublattice mean field ---- */
typedef struct spl_mf_params {
  double J, epsilon, psi, g, B, T;
} spl_mf_params;

typedef enum spl_phase { SPL_PARAMAGNETIC = 0, SPL_SPIN_FLOP = 1, SPL_ANTIFERROMAGNETIC = 2 } spl_phase;

typedef struct spl_mf_state {
  double M1, M2, theta1, theta2, phi1, phi2, dtheta, free_energy, residual;
  spl_phase phase;
} spl_mf_state;

typedef struct spl_phase_map spl_phase_map;

SPL_API void spl_mf_params_default(spl_mf_params* p);
SPL_API const char* spl_phase_name(spl_phase p);
SPL_API spl_status spl_mf_solve(const spl_mf_params* p, spl_mf_state* s);
SPL_API spl_status spl_mf_critical_field(const spl_mf_params* p, double* B);
SPL_API spl_status spl_mf_spin_flop_field(const spl_mf_params* p, double* B);
SPL_API spl_status spl_mf_neel_temperature(const spl_mf_params* p, double* T);
/* Row-major cells, index iT * nB + iB. */
SPL_API spl_status spl_mf_phase_map(const spl_mf_params* tmpl, const double* T, size_t nT, const double* B,
                                    size_t nB, int jobs, spl_phase_map** out);
SPL_API size_t spl_phase_map_size(const spl_phase_map* m);
/* Returns SPL_ERR_NO_CONVERGENCE for a failed cell; the message is in spl_last_error. */
SPL_API spl_status spl_phase_map_cell(const spl_phase_map* m, size_t i, double* T, double* B, spl_mf_state* s);
SPL_API void spl_phase_map_free(spl_phase_map* m);

/* ---- linearized dynamics; angular frequencies in kelvin ---- */
typedef struct spl_modes {
  spl_complex omegas[4];
  size_t count;
  spl_complex selected;
  int has_selected, defective;
  double condition;
} spl_modes;

typedef struct spl_mode_node {
  double psi, weight;
  spl_complex omega;
  spl_phase phase;
  int ok;
  char flags[128];
} spl_mode_node;

SPL_API spl_status spl_llg_modes(const spl_mf_params* p, double gilbert, spl_modes* out);
SPL_API spl_status spl_llg_analytic(const spl_mf_params* p, double* omega);
SPL_API spl_status spl_llg_canted_exact(const spl_mf_params* p, double* omega);
SPL_API spl_status spl_gilbert_from_linewidth(double gamma_hz, double B, double g, double* gilbert);
/* `nodes` entries are written to out. */
SPL_API spl_status spl_powder_modes(const spl_mf_params* p, double gilbert, int nodes, int jobs, spl_mode_node* out);

/* ---- transmission ---- */
typedef struct spl_coupling_model {
  double alpha_N, gamma_phi, gamma_inh, N;
} spl_coupling_model;

typedef enum spl_statistics { SPL_MAGNON = 0, SPL_CLASSICAL_MF = 1 } spl_statistics;

typedef struct spl_powder_options {
  int nodes;
  spl_statistics statistics;
  double gilbert; /* < 0: derived from the paramagnetic linewidth */
  int jobs;
} spl_powder_options;

typedef struct spl_line_stats {
  double center, relative_shift, spread, excess_broadening;
} spl_line_stats;

typedef struct spl_spectrum spl_spectrum;

SPL_API void spl_coupling_model_default(spl_coupling_model* m);
SPL_API void spl_powder_options_default(spl_powder_options* o);
SPL_API spl_status spl_collective_coupling(const spl_coupling_model* m, double f_hz, double T, double* G);
SPL_API spl_status spl_gamma_total(const spl_coupling_model* m, double f_hz, double T, double* Gamma);
SPL_API spl_status spl_visibility(double G, double Gamma, double* eta);
SPL_API spl_status spl_resonator_equivalent(double G, double f_hz, double* G_res);

SPL_API spl_status spl_paramagnetic_spectrum(const double* f, size_t n, double Omega, double G, double Gamma,
                                             spl_spectrum** out);
SPL_API spl_status spl_single_spin_spectrum(const double* f, size_t n, double Omega, double g, double Gamma,
                                            spl_spectrum** out);
SPL_API spl_status spl_ensemble_spectrum(const double* f, size_t n, const double* Omegas, const double* g,
                                         size_t n_spins, double Gamma, spl_spectrum** out);
SPL_API spl_status spl_powder_spectrum(const double* f, size_t n, const spl_mf_params* p,
                                       const spl_coupling_model* m, const spl_powder_options* o,
                                       spl_spectrum** out);
/* `points` frequencies covering every orientation's line. */
SPL_API spl_status spl_powder_grid(const spl_mf_params* p, const spl_coupling_model* m,
                                   const spl_powder_options* o, size_t points, double* f);
SPL_API spl_status spl_powder_line_stats(const spl_mf_params* p, const spl_coupling_model* m,
                                         const spl_powder_options* o, spl_line_stats* out);
SPL_API spl_status spl_visibility_vs_temperature(spl_statistics s, const double* T, size_t nT,
                                                 const spl_mf_params* p, const spl_coupling_model* m,
                                                 int broadening, const spl_powder_options* o, double* eta);

SPL_API size_t spl_spectrum_size(const spl_spectrum* s);
SPL_API spl_status spl_spectrum_point(const spl_spectrum* s, size_t i, double* f, spl_complex* s21, spl_complex* s11);
SPL_API const char* spl_spectrum_model(const spl_spectrum* s);
SPL_API size_t spl_spectrum_param_count(const spl_spectrum* s);
SPL_API spl_status spl_spectrum_param(const spl_spectrum* s, size_t i, const char** key, const char** value);
SPL_API void spl_spectrum_free(spl_spectrum* s);

/* ---- raw sweeps, normalization and fitting ---- */
typedef struct spl_sweep spl_sweep;
typedef struct spl_normalized spl_normalized;

typedef struct spl_background {
  double amplitude;
  double ripple_amp[3], ripple_period[3], ripple_phase[3];
  double delay;
  spl_complex reflection;
} spl_background;

typedef struct spl_synth_config {
  double T;
  spl_coupling_model model;
  int powder; /* 0: paramagnetic line, 1: powder spin-wave line */
  spl_mf_params chain;
  spl_background background;
  int unit_background;
  double noise;
  uint64_t seed;
  int include_s11;
  int nodes;
} spl_synth_config;

SPL_API void spl_synth_config_default(spl_synth_config* c);
SPL_API spl_status spl_synthesize(const spl_synth_config* c, const double* f, size_t nf, const double* B, size_t nB,
                                  spl_sweep** out);
SPL_API spl_status spl_sweep_read(const char* path, spl_sweep** out);
SPL_API spl_status spl_sweep_write(const spl_sweep* s, const char* path);
SPL_API spl_status spl_sweep_dims(const spl_sweep* s, size_t* nf, size_t* nB, int* has_s11);
SPL_API spl_status spl_sweep_frequency(const spl_sweep* s, size_t i, double* f);
SPL_API spl_status spl_sweep_field(const spl_sweep* s, size_t i, double* B);
SPL_API spl_status spl_sweep_value(const spl_sweep* s, size_t iB, size_t iF, spl_complex* s21, spl_complex* s11);
SPL_API double spl_sweep_temperature(const spl_sweep* s);
SPL_API void spl_sweep_set_temperature(spl_sweep* s, double T);
SPL_API void spl_sweep_free(spl_sweep* s);

SPL_API spl_status spl_normalize_transmission(const spl_sweep* s, double B, double dB, double g, spl_normalized** out);
/* |S11(B) - S11(B+dB)| / |S21(B+dB)|; invalid points are NaN. */
SPL_API spl_status spl_normalize_reflection(const spl_sweep* s, double B, double dB, double g, double* amplitude);
SPL_API size_t spl_normalized_size(const spl_normalized* n);
SPL_API spl_status spl_normalized_point(const spl_normalized* n, size_t i, double* f, spl_complex* s21, int* valid);
SPL_API double spl_normalized_mirror(const spl_normalized* n);
SPL_API size_t spl_normalized_warning_count(const spl_normalized* n);
SPL_API const char* spl_normalized_warning(const spl_normalized* n, size_t i);
SPL_API void spl_normalized_free(spl_normalized* n);

typedef struct spl_fit_options {
  int has_window;
  double window_lo, window_hi;
  int has_initial;
  double initial[3]; /* G, Gamma, Omega */
  int amplitude_only;
  int reference_model;
  int max_iter;
  double rel_tol;
} spl_fit_options;

typedef struct spl_fit_result {
  double G, Gamma, Omega, eta;
  double covariance[9];
  double errors[3];
  double residual_rms;
  int converged, iterations, points;
  char warnings[256];
} spl_fit_result;

SPL_API void spl_fit_options_default(spl_fit_options* o);
SPL_API spl_status spl_fit_normalized(const spl_normalized* n, const spl_fit_options* o, spl_fit_result* r);
SPL_API spl_status spl_fit_spectrum(const double* f, const spl_complex* s21, size_t n, const spl_fit_options* o,
                                    spl_fit_result* r);

typedef struct spl_line_metrics {
  double center, fwhm, visibility;
} spl_line_metrics;
SPL_API spl_status spl_extract_line_metrics(const double* f, const spl_complex* s21, size_t n, spl_line_metrics* m);

typedef struct spl_coupling_point {
  double B, T, G;
} spl_coupling_point;
typedef struct spl_coupling_fit {
  double alpha_N, uncertainty, ci95, residual;
  int points;
} spl_coupling_fit;
/* relative_weights != 0 weights each point by 1/x^2 (relative errors). */
SPL_API spl_status spl_fit_coupling_law(const spl_coupling_point* pts, size_t n, double g, int relative_weights,
                                        spl_coupling_fit* out);

#ifdef __cplusplus
}
#endif

#endif
