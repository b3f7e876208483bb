#include "lipokin/io.hpp"

#include <cstdio>
#include <ostream>

#include "lipokin/kinetics.hpp"

namespace lipokin {

std::string format_g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  os << "t,s,q,p,f,res_glycerol,res_acyl\n";
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const State x = traj.state(i);
    const ConservationResiduals res =
        conservation_residuals(x, traj.params.L, traj.params.q0);
    os << format_g17(traj.time(i)) << ',' << format_g17(x.s) << ','
       << format_g17(x.q) << ',' << format_g17(x.p) << ',' << format_g17(x.f)
       << ',' << format_g17(res.glycerol) << ',' << format_g17(res.acyl)
       << '\n';
  }
}

const char* model_kind_name(ModelKind m) {
  switch (m) {
    case ModelKind::Full:
      return "full";
    case ModelKind::Qssa0L:
      return "qssa0-L";
    case ModelKind::Qssa1L:
      return "qssa1-L";
    case ModelKind::Qssa1V:
      return "qssa1-V";
    case ModelKind::Qssa1Kappa:
      return "qssa1-kappa";
  }
  return "unknown";
}

const char* method_name(Method m) {
  switch (m) {
    case Method::Rosenbrock23:
      return "rosenbrock23";
    case Method::Dopri45:
      return "dopri45";
  }
  return "unknown";
}

}  // namespace lipokin
