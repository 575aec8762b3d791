#include "metarec/random.hpp"

#include <cmath>

namespace metarec {

double standard_normal(Engine& engine) {
    double u = uniform_unit(engine);
    while (u <= 0.0) u = uniform_unit(engine);
    const double v = uniform_unit(engine);
    return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * 3.14159265358979323846 * v);
}

}  // namespace metarec
