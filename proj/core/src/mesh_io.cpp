#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "varorder/errors.hpp"
#include "varorder/geometry.hpp"

namespace varorder {

namespace {

// Yields the whitespace-separated fields of each non-empty line, with '#'
// comments stripped.
template <class Fn>
void for_each_record(const std::string& path, Fn&& fn)
{
    std::ifstream in(path);
    if (!in) {
        throw InvalidInput("cannot open mesh file " + path);
    }
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        std::istringstream fields(line);
        std::vector<std::string> tok;
        for (std::string t; fields >> t;) {
            tok.push_back(std::move(t));
        }
        if (!tok.empty()) {
            fn(tok, path + ":" + std::to_string(lineno));
        }
    }
}

long parse_int(const std::string& s, const std::string& where)
{
    std::size_t used = 0;
    long v = 0;
    try {
        v = std::stol(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != s.size()) {
        throw InvalidInput(where + ": expected an integer, got '" + s + "'");
    }
    return v;
}

double parse_double(const std::string& s, const std::string& where)
{
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != s.size()) {
        throw InvalidInput(where + ": expected a number, got '" + s + "'");
    }
    return v;
}

}  // namespace

Mesh read_mesh(const std::string& stem)
{
    std::vector<Point> pts;
    for_each_record(stem + ".node", [&](const std::vector<std::string>& tok, const std::string& where) {
        if (tok.size() != 4) {
            throw InvalidInput(where + ": node lines are 'id x y boundary_flag'");
        }
        if (parse_int(tok[0], where) != static_cast<long>(pts.size())) {
            throw InvalidInput(where + ": node ids must be 0-based and consecutive");
        }
        parse_int(tok[3], where);  // the flag is informational; topology decides
        pts.push_back({parse_double(tok[1], where), parse_double(tok[2], where)});
    });

    std::vector<Triangle> tris;
    std::vector<int> tags;
    for_each_record(stem + ".ele", [&](const std::vector<std::string>& tok, const std::string& where) {
        if (tok.size() != 5) {
            throw InvalidInput(where + ": element lines are 'id v1 v2 v3 tag'");
        }
        if (parse_int(tok[0], where) != static_cast<long>(tris.size())) {
            throw InvalidInput(where + ": element ids must be 0-based and consecutive");
        }
        tris.push_back({static_cast<int>(parse_int(tok[1], where)), static_cast<int>(parse_int(tok[2], where)),
                        static_cast<int>(parse_int(tok[3], where))});
        tags.push_back(static_cast<int>(parse_int(tok[4], where)));
    });
    return {std::move(pts), std::move(tris), std::move(tags)};
}

void write_mesh(const Mesh& mesh, const std::string& stem)
{
    std::ofstream node(stem + ".node");
    std::ofstream ele(stem + ".ele");
    if (!node || !ele) {
        throw InvalidInput("cannot write mesh files at " + stem);
    }
    node << "# id x y boundary_flag\n" << std::setprecision(17);
    for (int v = 0; v < mesh.vertex_count(); ++v) {
        const Point p = mesh.vertices()[static_cast<std::size_t>(v)];
        node << v << ' ' << p.x << ' ' << p.y << ' ' << (mesh.is_boundary(v) ? 1 : 0) << '\n';
    }
    ele << "# id v1 v2 v3 tag\n";
    for (int t = 0; t < mesh.triangle_count(); ++t) {
        const auto& tri = mesh.triangles()[static_cast<std::size_t>(t)];
        ele << t << ' ' << tri[0] << ' ' << tri[1] << ' ' << tri[2] << ' ' << mesh.tags()[static_cast<std::size_t>(t)]
            << '\n';
    }
}

}  // namespace varorder
