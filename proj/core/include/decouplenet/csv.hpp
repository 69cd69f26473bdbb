#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace dcn::io {

struct Csv {
    std::vector<std::string> header; // empty when the file has no header line
    Eigen::MatrixXd values;
};

// Rectangular numeric CSV: comma separator, decimal points, LF line endings.
// A non-numeric first line is treated as the header. Ragged rows and
// non-numeric or non-finite body cells raise DataError naming the location.
Csv read_csv(const std::string& path);

// Values are written in the shortest form that parses back to the identical
// double, so write -> read round trips exactly.
void write_csv(const std::string& path, const Eigen::MatrixXd& values,
               const std::vector<std::string>& header = {});

std::string format_csv(const Eigen::MatrixXd& values,
                       const std::vector<std::string>& header = {});

// Writes to a temporary file in the target directory and renames it into
// place, so a failed run never leaves a partial file behind.
void atomic_write(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

} // namespace dcn::io
