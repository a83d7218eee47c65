// Copyright 2026 The pevqe Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include <algorithm>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "pevqe/environment.hpp"
#include "pevqe/error.hpp"

namespace pevqe::pe {

namespace {

struct Line {
    int number;
    std::vector<std::string> tokens;
};

std::vector<Line> tokenize(std::istream &in) {
    std::vector<Line> lines;
    std::string raw;
    int number = 0;
    while (std::getline(in, raw)) {
        ++number;
        if (auto bang = raw.find_first_of("!#"); bang != std::string::npos) {
            raw.erase(bang);
        }
        std::istringstream ss(raw);
        Line line{number, {}};
        for (std::string tok; ss >> tok;) {
            line.tokens.push_back(tok);
        }
        if (!line.tokens.empty()) {
            lines.push_back(std::move(line));
        }
    }
    return lines;
}

[[noreturn]] void fail(const Line &line, const std::string &msg) {
    throw ParseError("potential file line " + std::to_string(line.number) +
                     ": " + msg);
}

double to_double(const Line &line, const std::string &tok) {
    double v = 0.0;
    const char *end = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(tok.data(), end, v);
    if (ec != std::errc() || ptr != end) {
        fail(line, "expected a number, got '" + tok + "'");
    }
    return v;
}

bool is_integer(const std::string &tok) {
    long v = 0;
    const char *end = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(tok.data(), end, v);
    return ec == std::errc() && ptr == end;
}

long to_integer(const Line &line, const std::string &tok) {
    long v = 0;
    const char *end = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(tok.data(), end, v);
    if (ec != std::errc() || ptr != end) {
        fail(line, "expected an integer, got '" + tok + "'");
    }
    return v;
}

std::string upper(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return std::toupper(c); });
    return s;
}

bool is_section(const Line &line) {
    const auto t = upper(line.tokens.front());
    return t.starts_with("@") || t == "EXCLISTS";
}

std::string section_name(const Line &line) {
    auto t = upper(line.tokens.front());
    if (t.starts_with("@")) {
        t.erase(0, 1);
    }
    return t;
}

// Rows of a block, with an optional leading count line.
struct Block {
    Line header;
    std::vector<Line> rows;
};

std::size_t site_id(const Line &line, const std::string &tok,
                    std::size_t n_sites) {
    const long id = to_integer(line, tok);
    if (id < 1 || static_cast<std::size_t>(id) > n_sites) {
        fail(line, "site id " + tok + " outside 1.." + std::to_string(n_sites));
    }
    return static_cast<std::size_t>(id - 1);
}

// Strips a single-integer count line and checks it against the row count.
std::vector<Line> counted_rows(const Line &header, std::vector<Line> rows) {
    if (!rows.empty() && rows.front().tokens.size() == 1 &&
        is_integer(rows.front().tokens.front())) {
        const long count = to_integer(rows.front(), rows.front().tokens[0]);
        rows.erase(rows.begin());
        if (count < 0 || static_cast<std::size_t>(count) != rows.size()) {
            fail(header, "block declares " + std::to_string(count) +
                             " entries but lists " +
                             std::to_string(rows.size()));
        }
    }
    return rows;
}

struct UnionFind {
    std::vector<std::size_t> parent;
    explicit UnionFind(std::size_t n) : parent(n) {
        std::iota(parent.begin(), parent.end(), 0);
    }
    std::size_t find(std::size_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    void join(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) {
            parent[std::max(a, b)] = std::min(a, b);
        }
    }
};

} // namespace

EnvironmentModel parse_potential(std::istream &in) {
    const auto lines = tokenize(in);

    // Group lines into sections.
    std::vector<std::pair<Line, std::vector<Line>>> sections;
    for (const auto &line : lines) {
        if (is_section(line)) {
            sections.push_back({line, {}});
        } else if (sections.empty()) {
            fail(line, "data before the first section header");
        } else {
            sections.back().second.push_back(line);
        }
    }

    EnvironmentModel env;
    bool have_coordinates = false;
    std::map<std::string, int> seen;

    for (auto &[header, body] : sections) {
        const auto name = section_name(header);
        if (++seen[name] > 1) {
            fail(header, "duplicate section " + name);
        }
        if (name == "COORDINATES") {
            auto rows = body;
            std::optional<long> count;
            double scale = 1.0;
            // Optional count and unit lines, in either order.
            for (int i = 0; i < 2 && !rows.empty() &&
                            rows.front().tokens.size() == 1;
                 ++i) {
                const auto &tok = rows.front().tokens[0];
                if (is_integer(tok)) {
                    count = to_integer(rows.front(), tok);
                } else {
                    const auto unit = upper(tok);
                    if (unit == "AA" || unit == "ANGSTROM") {
                        scale = kBohrPerAngstrom;
                    } else if (unit != "AU" && unit != "BOHR") {
                        fail(rows.front(), "unknown unit '" + tok + "'");
                    }
                }
                rows.erase(rows.begin());
            }
            if (count && static_cast<std::size_t>(*count) != rows.size()) {
                fail(header, "block declares " + std::to_string(*count) +
                                 " sites but lists " +
                                 std::to_string(rows.size()));
            }
            for (const auto &row : rows) {
                if (row.tokens.size() != 4) {
                    fail(row, "coordinate rows need: label x y z");
                }
                PolarizableSite site;
                site.label = row.tokens[0];
                site.position = scale * Vec3(to_double(row, row.tokens[1]),
                                             to_double(row, row.tokens[2]),
                                             to_double(row, row.tokens[3]));
                site.exclusion_group =
                    static_cast<int>(env.sites.size());
                env.sites.push_back(site);
            }
            have_coordinates = true;
            continue;
        }
        if (!have_coordinates) {
            fail(header, "section " + name + " precedes @COORDINATES");
        }
        const std::size_t n = env.size();

        if (name == "MULTIPOLES" || name == "POLARIZABILITIES") {
            std::vector<Block> blocks;
            for (auto &row : body) {
                if (upper(row.tokens[0]) == "ORDER") {
                    blocks.push_back({row, {}});
                } else if (blocks.empty()) {
                    fail(row, "expected ORDER line");
                } else {
                    blocks.back().rows.push_back(row);
                }
            }
            std::map<std::string, int> orders;
            for (auto &block : blocks) {
                const auto &h = block.header;
                std::string key;
                for (std::size_t i = 1; i < h.tokens.size(); ++i) {
                    key += h.tokens[i] + " ";
                }
                if (++orders[key] > 1) {
                    fail(h, "duplicate ORDER block");
                }
                const auto rows = counted_rows(h, block.rows);
                std::vector<bool> filled(n, false);
                if (name == "MULTIPOLES") {
                    if (h.tokens.size() != 2) {
                        fail(h, "expected ORDER k");
                    }
                    const long order = to_integer(h, h.tokens[1]);
                    if (order < 0 || order > 2) {
                        fail(h, "multipole order must be 0, 1 or 2");
                    }
                    const std::size_t width = order == 0 ? 1 : order == 1 ? 3 : 6;
                    for (auto &s : env.sites) {
                        s.multipoles.max_order =
                            std::max<int>(s.multipoles.max_order,
                                          static_cast<int>(order));
                    }
                    for (const auto &row : rows) {
                        if (row.tokens.size() != width + 1) {
                            fail(row, "expected site id and " +
                                          std::to_string(width) + " values");
                        }
                        const auto s = site_id(row, row.tokens[0], n);
                        if (filled[s]) {
                            fail(row, "site listed twice in ORDER block");
                        }
                        filled[s] = true;
                        auto &mp = env.sites[s].multipoles;
                        std::vector<double> v;
                        for (std::size_t i = 1; i < row.tokens.size(); ++i) {
                            v.push_back(to_double(row, row.tokens[i]));
                        }
                        if (order == 0) {
                            mp.charge = v[0];
                        } else if (order == 1) {
                            mp.dipole = Vec3(v[0], v[1], v[2]);
                        } else {
                            mp.quadrupole << v[0], v[1], v[2], v[1], v[3],
                                v[4], v[2], v[4], v[5];
                        }
                    }
                } else {
                    if (h.tokens.size() != 3 || h.tokens[1] != "1" ||
                        h.tokens[2] != "1") {
                        fail(h, "only ORDER 1 1 polarizabilities are supported");
                    }
                    for (const auto &row : rows) {
                        const auto width = row.tokens.size() - 1;
                        if (width != 6 && width != 9) {
                            fail(row, "expected site id and 6 (or 9) values");
                        }
                        const auto s = site_id(row, row.tokens[0], n);
                        if (filled[s]) {
                            fail(row, "site listed twice in ORDER block");
                        }
                        filled[s] = true;
                        std::vector<double> v;
                        for (std::size_t i = 1; i < row.tokens.size(); ++i) {
                            v.push_back(to_double(row, row.tokens[i]));
                        }
                        Mat3 a;
                        if (width == 6) {
                            a << v[0], v[1], v[2], v[1], v[3], v[4], v[2], v[4],
                                v[5];
                        } else {
                            a << v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7],
                                v[8];
                            if ((a - a.transpose()).cwiseAbs().maxCoeff() >
                                1e-12) {
                                fail(row, "polarizability is not symmetric");
                            }
                        }
                        env.sites[s].polarizability = a;
                    }
                }
            }
        } else if (name == "EXCLISTS") {
            auto rows = body;
            // Optional "N M" header as written by other tools.
            if (!rows.empty() && rows.front().tokens.size() == 2 &&
                is_integer(rows.front().tokens[0]) &&
                is_integer(rows.front().tokens[1]) &&
                static_cast<std::size_t>(
                    to_integer(rows.front(), rows.front().tokens[0])) ==
                    rows.size() - 1) {
                rows.erase(rows.begin());
            }
            UnionFind uf(n);
            std::vector<bool> filled(n, false);
            for (const auto &row : rows) {
                const auto s = site_id(row, row.tokens[0], n);
                if (filled[s]) {
                    fail(row, "site listed twice in EXCLISTS");
                }
                filled[s] = true;
                for (std::size_t i = 1; i < row.tokens.size(); ++i) {
                    if (to_integer(row, row.tokens[i]) == 0) {
                        continue; // padding
                    }
                    uf.join(s, site_id(row, row.tokens[i], n));
                }
            }
            std::map<std::size_t, int> group_of_root;
            for (std::size_t s = 0; s < n; ++s) {
                const auto root = uf.find(s);
                auto [it, fresh] = group_of_root.emplace(
                    root, static_cast<int>(group_of_root.size()));
                env.sites[s].exclusion_group = it->second;
            }
        } else {
            fail(header, "unknown section " + name);
        }
    }
    if (!have_coordinates && !sections.empty()) {
        throw ParseError("potential file lacks @COORDINATES");
    }
    try {
        env.validate();
    } catch (const ValidationError &e) {
        throw ParseError(std::string("potential file: ") + e.what());
    }
    return env;
}

EnvironmentModel parse_potential_file(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open potential file " + path.string());
    }
    return parse_potential(in);
}

void write_potential(std::ostream &out, const EnvironmentModel &env) {
    const auto old_flags = out.flags();
    const auto old_precision = out.precision();
    out << std::setprecision(17);
    const std::size_t n = env.size();
    out << "@COORDINATES\n" << n << "\nAU\n";
    for (const auto &s : env.sites) {
        out << s.label << ' ' << s.position.x() << ' ' << s.position.y() << ' '
            << s.position.z() << '\n';
    }
    int max_order = 0;
    for (const auto &s : env.sites) {
        max_order = std::max(max_order, s.multipoles.max_order);
        if (!s.multipoles.dipole.isZero(0.0)) {
            max_order = std::max(max_order, 1);
        }
        if (!s.multipoles.quadrupole.isZero(0.0)) {
            max_order = 2;
        }
    }
    out << "@MULTIPOLES\n";
    for (int k = 0; k <= max_order; ++k) {
        out << "ORDER " << k << '\n' << n << '\n';
        for (std::size_t i = 0; i < n; ++i) {
            const auto &m = env.sites[i].multipoles;
            out << i + 1;
            if (k == 0) {
                out << ' ' << m.charge;
            } else if (k == 1) {
                out << ' ' << m.dipole.x() << ' ' << m.dipole.y() << ' '
                    << m.dipole.z();
            } else {
                const auto &q = m.quadrupole;
                out << ' ' << q(0, 0) << ' ' << q(0, 1) << ' ' << q(0, 2)
                    << ' ' << q(1, 1) << ' ' << q(1, 2) << ' ' << q(2, 2);
            }
            out << '\n';
        }
    }
    const auto pol = env.polarizable_sites();
    out << "@POLARIZABILITIES\nORDER 1 1\n" << pol.size() << '\n';
    for (auto i : pol) {
        const auto &a = env.sites[i].polarizability;
        out << i + 1 << ' ' << a(0, 0) << ' ' << a(0, 1) << ' ' << a(0, 2)
            << ' ' << a(1, 1) << ' ' << a(1, 2) << ' ' << a(2, 2) << '\n';
    }
    std::map<int, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < n; ++i) {
        groups[env.sites[i].exclusion_group].push_back(i);
    }
    std::vector<std::string> rows;
    for (std::size_t i = 0; i < n; ++i) {
        const auto &members = groups[env.sites[i].exclusion_group];
        if (members.size() < 2) {
            continue;
        }
        std::string row = std::to_string(i + 1);
        for (auto j : members) {
            if (j != i) {
                row += ' ' + std::to_string(j + 1);
            }
        }
        rows.push_back(row);
    }
    if (!rows.empty()) {
        out << "@EXCLISTS\n";
        for (const auto &r : rows) {
            out << r << '\n';
        }
    }
    out.flags(old_flags);
    out.precision(old_precision);
}

void write_potential_file(const std::filesystem::path &path,
                          const EnvironmentModel &env) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write potential file " + path.string());
    }
    write_potential(out, env);
    if (!out) {
        throw IoError("failed writing potential file " + path.string());
    }
}

} // namespace pevqe::pe
