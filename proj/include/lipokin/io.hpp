#pragma once

#include <iosfwd>
#include <string>

#include "lipokin/simulate.hpp"

namespace lipokin {

/// Shortest round-trip decimal form of a double (17 significant digits).
std::string format_g17(double x);

/// Time series CSV: t,s,q,p,f,res_glycerol,res_acyl. The residual columns
/// check the two conserved linear combinations of the closed system; for
/// reduced models they show the model's conservation defect.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

const char* model_kind_name(ModelKind m);
const char* method_name(Method m);

}  // namespace lipokin
