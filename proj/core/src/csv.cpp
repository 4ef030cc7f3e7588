#include "varorder/csv.hpp"

#include <charconv>
#include <thread>

#include "varorder/errors.hpp"
#include "varorder/parallel.hpp"

namespace varorder {

namespace {
unsigned g_threads = 0;
}

void set_thread_count(unsigned n)
{
    g_threads = n;
}

unsigned thread_count()
{
    if (g_threads > 0) {
        return g_threads;
    }
    return std::max(1U, std::thread::hardware_concurrency());
}

std::string format_number(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return {buf, res.ptr};
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header)
    : out_(path), width_(header.size())
{
    if (!out_) {
        throw InvalidInput("cannot open " + path + " for writing");
    }
    row(header);
}

void CsvWriter::row(std::initializer_list<double> values)
{
    std::vector<std::string> fields;
    fields.reserve(values.size());
    for (double v : values) {
        fields.push_back(format_number(v));
    }
    row(fields);
}

void CsvWriter::row(const std::vector<std::string>& fields)
{
    if (fields.size() != width_) {
        throw InvalidInput("csv row has " + std::to_string(fields.size()) + " fields, header has " +
                           std::to_string(width_));
    }
    for (std::size_t i = 0; i < fields.size(); ++i) {
        out_ << (i ? "," : "") << fields[i];
    }
    out_ << '\n';
}

}  // namespace varorder
