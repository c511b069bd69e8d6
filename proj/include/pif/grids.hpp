#ifndef PIF_GRIDS_HPP
#define PIF_GRIDS_HPP

#include <Eigen/Core>

namespace pif {

// Row-major throughout: the hot loops walk one entity's factor row at a time.
using Grid = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vec = Eigen::VectorXd;
using IVec = Eigen::VectorXi;

}  // namespace pif

#endif
