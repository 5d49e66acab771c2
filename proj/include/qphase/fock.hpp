#pragma once

#include "qphase/types.hpp"

namespace qphase {

// Schwinger J_z = (a^dag a - b^dag b)/2, diagonal in the Fock basis.
Operator build_jz(FockCutoff cutoff);

// Total number operator n = a^dag a + b^dag b.
Operator build_number(FockCutoff cutoff);

// Generator of the k=2 nonlinear phase shift, n J_z, diagonal with entry
// (i+j)(i-j)/2 at |i,j>.
Operator build_nonlinear_generator(FockCutoff cutoff);

// Schwinger J_x = (a^dag b + a b^dag)/2, truncated at the cutoff.
Operator build_jx(FockCutoff cutoff);

// exp(i*phi*G) for Hermitian G. Diagonal generators are exponentiated
// element-wise; dense ones through a Hermitian eigendecomposition.
Operator phase_unitary(const Operator& generator, double phi);

// Second (physical) beam splitter, exp(i*pi*J_x/2).
Operator beam_splitter_rotation(FockCutoff cutoff);

// Shared per-cutoff cache of beam_splitter_rotation; thread safe.
const Mat& cached_beam_splitter(FockCutoff cutoff);

double mean_particle_number(const TwoModePureState& state);

// Generator matching the phase-shift kind: J_z or n J_z.
Operator phase_generator(FockCutoff cutoff, PhaseKind kind);

bool is_hermitian(const Mat& m, double tol = 1e-12);
bool is_unitary(const Mat& m, double tol = 1e-10);
bool is_diagonal(const Mat& m, double tol = 1e-14);

}  // namespace qphase
