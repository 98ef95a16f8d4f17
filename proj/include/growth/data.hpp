#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "growth/errors.hpp"
#include "growth/models.hpp"

namespace growth {

// A panel of growth trajectories: n rows (individuals), q columns (times).
// Single-series data are the n = 1 special case.
struct TrajectoryMatrix {
    Eigen::MatrixXd x;             // n x q sizes
    TimeGrid grid;                 // shared uniform schedule, q points
    std::vector<std::string> ids;  // optional row labels (empty or size n)
    long nonpositive_draws = 0;    // diagnostic set by the simulator

    long n() const { return x.rows(); }
    int q() const { return static_cast<int>(x.cols()); }

    void validate() const {
        grid.validate();
        if (x.cols() != grid.q)
            throw DimensionMismatch("trajectory columns != grid points");
        if (x.rows() < 1) throw DimensionMismatch("need at least one trajectory");
        if (!ids.empty() && static_cast<long>(ids.size()) != x.rows())
            throw DimensionMismatch("id count != trajectory count");
    }

    Eigen::VectorXd col_means() const { return x.colwise().mean(); }

    // Sample covariance (divisor n-1) of the selected columns.
    Eigen::MatrixXd sample_cov(const std::vector<int>& cols) const {
        const long rows = x.rows();
        if (rows < 2)
            throw DomainError("sample covariance needs at least two trajectories");
        const int k = static_cast<int>(cols.size());
        Eigen::MatrixXd sub(rows, k);
        for (int c = 0; c < k; ++c) sub.col(c) = x.col(cols[static_cast<size_t>(c)]);
        const Eigen::RowVectorXd mean = sub.colwise().mean();
        sub.rowwise() -= mean;
        return sub.transpose() * sub / static_cast<double>(rows - 1);
    }
};

} // namespace growth
