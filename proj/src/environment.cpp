#include "clockreg/environment.hpp"

#include "clockreg/errors.hpp"

namespace clockreg {

void Environment::validate() const {
  atom.validate();
  lattice.validate();
  if (!(bias_field >= 0.0)) throw InputError("bias field must be >= 0");
  if (drive.spectator_cutoff < 0.0) throw InputError("spectator cutoff must be >= 0");
  for (double w : drive.polarization_mix) {
    if (w < 0.0) throw InputError("polarization weights must be >= 0");
  }
}

LevelArray<double> Environment::energies() const {
  return level_energies(atom, bias_field, lattice);
}

double Environment::resonance(const TransitionId& t) const {
  return transition_frequency(atom, t, bias_field, lattice);
}

double Environment::drive_frequency(const TransitionId& t) const {
  const bool two_photon = t.natural_polarization() == Polarization::TwoPhoton;
  return resonance(t) + (two_photon ? two_photon_light_shift : 0.0);
}

DriveTerm Environment::make_drive(const TransitionId& t, double rabi, double frequency,
                                  double phase) const {
  DriveTerm d = DriveTerm::on(t, rabi, frequency, phase, drive);
  if (d.polarization == Polarization::TwoPhoton) d.upper_shift = two_photon_light_shift;
  return d;
}

}  // namespace clockreg
