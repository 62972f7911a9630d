#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "caprecap/types.hpp"

namespace caprecap {

using RawRow = std::pair<std::vector<double>, std::vector<double>>;  // (y, x)

// Checks widths, binary indicators, finite covariates and the support
// condition y != 0; throws a SchemaError subtype naming the offending row.
CaptureDataset validate_dataset(const std::vector<RawRow>& rows);

// CSV schema: header "y1,..,yK,x1,..,xd" with optional trailing
// "q1_hat,q2_hat,q12_hat" columns carrying externally fitted nuisances.
struct CsvData {
    CaptureDataset dataset;
    // Raw external nuisance columns, aligned with dataset.units; empty when
    // the q*_hat columns are absent.
    std::vector<double> q1_hat, q2_hat, q12_hat;

    bool has_external_nuisance() const { return !q1_hat.empty(); }
};

CsvData read_csv(std::istream& in);
CsvData read_csv_file(const std::string& path);

// Writes y columns as integers and x columns with 17 significant digits so
// that read_csv(write_csv(d)) reproduces d exactly.
std::string write_csv(const CaptureDataset& data);

}  // namespace caprecap
