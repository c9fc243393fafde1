#pragma once

#include <Eigen/Core>

namespace pelhd {

/// An n x p sample (rows are observations) together with the per-component
/// summaries used by the penalty: column means, divisor-n variances and the
/// inverse-variance weights delta (zero for constant columns).
struct DataMatrix {
    Eigen::MatrixXd values;
    Eigen::VectorXd col_mean;
    Eigen::VectorXd col_var;
    Eigen::VectorXd delta;

    Eigen::Index n() const { return values.rows(); }
    Eigen::Index p() const { return values.cols(); }
};

/// Throws DimensionError when fewer than two rows or no columns are given.
DataMatrix compute_column_stats(Eigen::MatrixXd values);

/// Rows [first, first + count) of `data` with freshly computed statistics.
DataMatrix row_block(const DataMatrix& data, Eigen::Index first, Eigen::Index count);

}  // namespace pelhd
