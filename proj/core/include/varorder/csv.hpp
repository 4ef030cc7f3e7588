#pragma once

#include <fstream>
#include <initializer_list>
#include <string>
#include <vector>

namespace varorder {

/// Shortest round-trip text for a double ("%.17g"), so identical runs give identical files.
std::string format_number(double v);

/// Comma-separated output with a header row. Throws InvalidInput if the file cannot be opened.
class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header);

    void row(std::initializer_list<double> values);
    void row(const std::vector<std::string>& fields);

private:
    std::ofstream out_;
    std::size_t width_;
};

}  // namespace varorder
