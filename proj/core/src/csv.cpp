#include "decouplenet/csv.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "decouplenet/errors.hpp"
#include "decouplenet/format.hpp"

namespace dcn::io {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t pos = 0;
    while (true) {
        const std::size_t comma = line.find(',', pos);
        if (comma == std::string::npos) {
            fields.push_back(line.substr(pos));
            return fields;
        }
        fields.push_back(line.substr(pos, comma - pos));
        pos = comma + 1;
    }
}

bool parse_cell(const std::string& text, double& out) {
    const char* s = text.c_str();
    char* end = nullptr;
    out = std::strtod(s, &end);
    return end == s + text.size() && !text.empty();
}

} // namespace

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw DataError("cannot open '" + path + "' for reading");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

Csv read_csv(const std::string& path) {
    const std::string content = read_file(path);

    std::vector<std::string> lines;
    std::size_t pos = 0;
    while (pos < content.size()) {
        std::size_t nl = content.find('\n', pos);
        if (nl == std::string::npos)
            nl = content.size();
        std::string line = content.substr(pos, nl - pos);
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (!line.empty())
            lines.push_back(std::move(line));
        pos = nl + 1;
    }
    if (lines.empty())
        throw DataError("'" + path + "' contains no data");

    Csv out;
    std::size_t first_data = 0;
    {
        // Header auto-detection: a first line with any non-numeric cell.
        const std::vector<std::string> fields = split_fields(lines[0]);
        double v;
        bool numeric = true;
        for (const std::string& f : fields)
            numeric = numeric && parse_cell(f, v);
        if (!numeric) {
            out.header = fields;
            first_data = 1;
        }
    }
    if (first_data >= lines.size())
        throw DataError("'" + path + "' has a header but no data rows");

    const std::size_t rows = lines.size() - first_data;
    std::size_t cols = 0;
    for (std::size_t r = 0; r < rows; ++r) {
        const std::vector<std::string> fields = split_fields(lines[first_data + r]);
        if (r == 0) {
            cols = fields.size();
            if (!out.header.empty() && out.header.size() != cols)
                throw DataError("'" + path + "': header has " +
                                std::to_string(out.header.size()) + " fields but row 1 has " +
                                std::to_string(cols));
            out.values.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
        } else if (fields.size() != cols) {
            throw DataError("'" + path + "': row " + std::to_string(r + 1) + " has " +
                            std::to_string(fields.size()) + " fields, expected " +
                            std::to_string(cols));
        }
        for (std::size_t c = 0; c < cols; ++c) {
            double v;
            if (!parse_cell(fields[c], v) || !std::isfinite(v))
                throw DataError("'" + path + "': row " + std::to_string(r + 1) + ", column " +
                                std::to_string(c + 1) + ": cannot read a finite number from '" +
                                fields[c] + "'");
            out.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v;
        }
    }
    return out;
}

std::string format_csv(const Eigen::MatrixXd& values, const std::vector<std::string>& header) {
    std::string s;
    if (!header.empty()) {
        if (static_cast<Eigen::Index>(header.size()) != values.cols())
            throw DataError("format_csv: header length does not match the column count");
        for (std::size_t c = 0; c < header.size(); ++c) {
            if (header[c].find(',') != std::string::npos ||
                header[c].find('\n') != std::string::npos)
                throw DataError("format_csv: header fields must not contain commas or newlines");
            s += (c ? "," : "") + header[c];
        }
        s += '\n';
    }
    for (Eigen::Index r = 0; r < values.rows(); ++r) {
        for (Eigen::Index c = 0; c < values.cols(); ++c) {
            if (c)
                s += ',';
            s += format_double(values(r, c));
        }
        s += '\n';
    }
    return s;
}

void write_csv(const std::string& path, const Eigen::MatrixXd& values,
               const std::vector<std::string>& header) {
    atomic_write(path, format_csv(values, header));
}

void atomic_write(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw DataError("cannot open '" + tmp + "' for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out)
            throw DataError("failed writing '" + tmp + "'");
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        std::remove(tmp.c_str());
        throw DataError("cannot move '" + tmp + "' into place at '" + path + "'");
    }
}

} // namespace dcn::io
