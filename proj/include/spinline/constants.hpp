#pragma once

#include <numbers>

namespace spinline {

// CODATA 2018 values, SI units.
struct PhysicalConstants {
  double g_S = 2.004;
  double mu_B = 9.2740100783e-24;  // J/T
  double k_B = 1.380649e-23;       // J/K
  double h = 6.62607015e-34;       // J s
  double hbar = 6.62607015e-34 / (2.0 * std::numbers::pi);
  double N_A = 6.02214076e23;      // 1/mol
};

inline constexpr const char* kConstantSet = "CODATA-2018";

const PhysicalConstants& constants();

// linear frequency (Hz) of the Zeeman splitting g mu_B B / h
double zeeman_frequency(double B, double g);
// Zeeman energy g mu_B B / k_B in kelvin
double zeeman_kelvin(double B, double g);
// h f / k_B in kelvin for a linear frequency
double hz_to_kelvin(double f);
double kelvin_to_hz(double e);

double angular_to_linear(double w);
double linear_to_angular(double f);

double bose_occupation(double f, double T);
double spin_polarization(double f, double T);

// Curie constant of one mole of free spins 1/2 in emu K/(mol Oe)
double curie_constant_half(double g);

}  // namespace spinline
