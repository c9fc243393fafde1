#include "pelhd/data_matrix.hpp"

#include "pelhd/errors.hpp"

#include <string>

namespace pelhd {

DataMatrix compute_column_stats(Eigen::MatrixXd values)
{
    if (values.rows() < 2)
        throw DimensionError("need at least 2 observations, got " + std::to_string(values.rows()));
    if (values.cols() < 1)
        throw DimensionError("need at least 1 component");

    DataMatrix d;
    const auto n = static_cast<double>(values.rows());
    d.col_mean = values.colwise().mean().transpose();
    d.col_var = (values.rowwise() - d.col_mean.transpose()).colwise().squaredNorm().transpose() / n;
    d.delta.resize(values.cols());
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
        // s_nj = 0 iff the column is constant; the mean of a constant column
        // can carry rounding error, so test the values themselves.
        const bool constant = values.col(j).minCoeff() == values.col(j).maxCoeff();
        if (constant) {
            d.col_mean(j) = values(0, j);
            d.col_var(j) = 0.0;
        }
        d.delta(j) = constant ? 0.0 : 1.0 / d.col_var(j);
    }
    d.values = std::move(values);
    return d;
}

DataMatrix row_block(const DataMatrix& data, Eigen::Index first, Eigen::Index count)
{
    if (first < 0 || count < 0 || first + count > data.n())
        throw DimensionError("row block out of range");
    return compute_column_stats(data.values.middleRows(first, count));
}

}  // namespace pelhd
