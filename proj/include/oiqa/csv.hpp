#pragma once

#include <map>
#include <string>
#include <vector>

#include "oiqa/common.hpp"

namespace oiqa {

// Header-row CSV, UTF-8, comma separated, no quoting (fields here are paths,
// identifiers and numbers). Parse failures report the 1-based line number.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(const std::string& name) const;         // -1 if absent
    int require_column(const std::string& name) const; // throws if absent
};

CsvTable read_csv(const std::string& path);
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

// "%.9g"-style numeric formatting; infinities serialize as "inf"/"-inf".
std::string fmt_num(double v);
double parse_num(const std::string& s, const std::string& context);
long parse_int(const std::string& s, const std::string& context);

}  // namespace oiqa
