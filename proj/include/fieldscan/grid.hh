#pragma once

#include <Eigen/Dense>

#include "fieldscan/errors.hh"

namespace fieldscan {

// An observed field is an n x m real matrix. Row index i (1..n in the math,
// 0-based here) runs vertically, column index j horizontally. All matrix <->
// vector conversions use column-major stacking, which is Eigen's native
// storage order, so vec(grid) is just a reinterpreting map.
using Grid = Eigen::MatrixXd;

inline void require_finite(const Grid& g, const char* what = "grid") {
    if (!g.allFinite())
        throw InputError(std::string(what) + " contains non-finite values");
}

inline Eigen::VectorXd vec(const Grid& g) {
    return Eigen::Map<const Eigen::VectorXd>(g.data(), g.size());
}

inline Grid unvec(const Eigen::VectorXd& v, Eigen::Index n, Eigen::Index m) {
    if (v.size() != n * m)
        throw DimensionMismatch("unvec: vector length does not match n*m");
    return Eigen::Map<const Grid>(v.data(), n, m);
}

}  // namespace fieldscan
