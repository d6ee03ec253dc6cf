#pragma once

#include "ibcm/verify.hpp"

#include <ostream>
#include <string>

namespace ibcm {

/// Legacy ASCII VTK structured grid of one patch sampled on an n x n lattice
/// of its parameter rectangle. Point data: active (1 inside the trimmed
/// region), u, N11, M11 and, for RM patches, gamma1.
void write_patch_vtk(std::ostream& os, const Problem& pb, const FieldSolution& u, int patch, int n);
void write_patch_vtk(const std::string& path, const Problem& pb, const FieldSolution& u, int patch, int n);

/// One row per level: level,h,dofs,l2,h1,h2,rate_l2,rate_h1,rate_h2,spd. The
/// rates are pairwise against the previous SPD level; empty when undefined.
void write_convergence_csv(std::ostream& os, const ConvergenceStudy& st);
/// Fitted rates: norm,rate,locking_flag.
void write_rates_csv(std::ostream& os, const ConvergenceStudy& st);

/// One line per solve: label,n,spd,symmetric,pivot_ratio,residual,message.
void write_spd_header(std::ostream& os);
void write_spd_line(std::ostream& os, const std::string& label, const SPDReport& r);

/// Shortest round-trip decimal form, used for every number in the outputs.
std::string format_number(double v);

}  // namespace ibcm
