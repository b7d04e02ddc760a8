#ifndef SHALLOWTREE_IO_HPP
#define SHALLOWTREE_IO_HPP

/**
 * @file io.hpp
 *
 * @brief Numeric CSV ingestion and tree serialization (JSON and Graphviz DOT).
 *
 * JSON layout, one object per node:
 *
 *     internal: {"dim", "theta", "n_points", "mistakes", "children": [left, right]}
 *     leaf:     {"leaf": {"cluster", "size", "explanation": [...], "points": [...]}}
 *
 * Explanations list the non-redundant conditions as {"dim", "op", "theta"}
 * with op "<=" or ">". Reals are written with 17 significant digits so a
 * parsed tree re-exports byte for byte.
 */

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "core.hpp"
#include "metrics.hpp"

namespace shallowtree {

/// Malformed input data; `line()` is 1-based, 0 when not tied to a line.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line)
        : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what),
          line_(line) {}

    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

inline bool parse_number(std::string_view cell, double& out) {
    cell = trim(cell);
    if (cell.empty()) {
        return false;
    }
    if (cell.front() == '+') {
        cell.remove_prefix(1);
    }
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), out);
    return ec == std::errc() && ptr == cell.data() + cell.size();
}

inline std::vector<std::string_view> split_cells(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            cells.push_back(line.substr(start));
            break;
        }
        cells.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return cells;
}

inline std::string format_real(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace detail

/**
 * Parses comma-separated finite numbers, one row per line (LF or CRLF).
 * Blank lines are skipped. A first row that is not fully numeric is taken
 * as a header and dropped.
 */
inline Dataset parse_csv(std::string_view text) {
    std::vector<double> values;
    std::size_t cols = 0;
    std::size_t rows = 0;
    bool first_row = true;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) {
            end = text.size();
        }
        const std::string_view line = detail::trim(text.substr(pos, end - pos));
        pos = end + 1;
        ++line_no;
        if (line.empty()) {
            continue;
        }
        const auto cells = detail::split_cells(line);
        std::vector<double> row(cells.size());
        bool numeric = true;
        std::size_t bad = 0;
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (!detail::parse_number(cells[c], row[c])) {
                numeric = false;
                bad = c;
                break;
            }
        }
        if (!numeric) {
            if (first_row) {
                first_row = false;
                continue;
            }
            throw ParseError("non-numeric cell '" + std::string(detail::trim(cells[bad])) + "'",
                             line_no);
        }
        for (double v : row) {
            if (!std::isfinite(v)) {
                throw ParseError("non-finite value", line_no);
            }
        }
        if (rows == 0) {
            cols = row.size();
        } else if (row.size() != cols) {
            throw ParseError("expected " + std::to_string(cols) + " columns, found " +
                                 std::to_string(row.size()),
                             line_no);
        }
        first_row = false;
        values.insert(values.end(), row.begin(), row.end());
        ++rows;
    }
    if (rows == 0) {
        throw ParseError("no data rows", line_no);
    }
    return Dataset(Matrix(rows, cols, std::move(values)));
}

inline Dataset load_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ParseError("cannot open " + path, 0);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_csv(buf.str());
}

namespace detail {

inline void write_json_node(const ThresholdTree& tree, NodeId id, int indent, std::string& out) {
    const auto& node = tree.node(id);
    const std::string pad(static_cast<std::size_t>(indent), ' ');
    if (node.leaf) {
        const auto reduced = explanation(tree, id).reduced();
        out += pad + "{\"leaf\": {\"cluster\": " + std::to_string(node.center);
        out += ", \"size\": " + std::to_string(node.points.size());
        out += ", \"explanation\": [";
        for (std::size_t i = 0; i < reduced.size(); ++i) {
            const auto& c = reduced[i];
            out += i ? ", " : "";
            out += "{\"dim\": " + std::to_string(c.dim) + ", \"op\": \"";
            out += c.direction == Direction::le ? "<=" : ">";
            out += "\", \"theta\": " + format_real(c.theta) + "}";
        }
        out += "], \"points\": [";
        for (std::size_t i = 0; i < node.points.size(); ++i) {
            out += i ? ", " : "";
            out += std::to_string(node.points[i]);
        }
        out += "]}}";
        return;
    }
    out += pad + "{\"dim\": " + std::to_string(node.cut.dim);
    out += ", \"theta\": " + format_real(node.cut.theta);
    out += ", \"n_points\": " + std::to_string(node.n_points);
    out += ", \"mistakes\": " + std::to_string(node.mistakes);
    out += ", \"children\": [\n";
    write_json_node(tree, node.left, indent + 2, out);
    out += ",\n";
    write_json_node(tree, node.right, indent + 2, out);
    out += "\n" + pad + "]}";
}

inline void read_json_node(const nlohmann::json& j, ThresholdTree& tree, NodeId id) {
    if (j.contains("leaf")) {
        const auto& leaf = j.at("leaf");
        auto points = leaf.at("points").get<std::vector<PointId>>();
        if (leaf.at("size").get<std::size_t>() != points.size()) {
            throw ParseError("leaf size does not match its point list", 0);
        }
        tree.set_leaf(id, leaf.at("cluster").get<CenterId>(), std::move(points));
        return;
    }
    const Cut cut{j.at("dim").get<std::size_t>(), j.at("theta").get<double>()};
    const auto& children = j.at("children");
    if (!children.is_array() || children.size() != 2) {
        throw ParseError("internal node needs exactly two children", 0);
    }
    const auto [l, r] =
        tree.split(id, cut, j.at("n_points").get<std::size_t>(), j.at("mistakes").get<std::size_t>());
    read_json_node(children[0], tree, l);
    read_json_node(children[1], tree, r);
}

inline std::string dot_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') {
            out += '\\';
        }
        out += c;
    }
    return out;
}

}  // namespace detail

inline std::string tree_to_json(const ThresholdTree& tree) {
    std::string out;
    detail::write_json_node(tree, tree.root(), 0, out);
    out += "\n";
    return out;
}

/// Rebuilds a tree from tree_to_json() output; checks that clusters are distinct.
inline ThresholdTree tree_from_json(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("invalid tree JSON: ") + e.what(), 0);
    }
    ThresholdTree tree;
    try {
        detail::read_json_node(j, tree, tree.add_root());
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed tree JSON: ") + e.what(), 0);
    }
    std::vector<CenterId> clusters;
    for (NodeId id : tree.leaves()) {
        clusters.push_back(tree.node(id).center);
    }
    std::sort(clusters.begin(), clusters.end());
    for (std::size_t i = 0; i < clusters.size(); ++i) {
        if (clusters[i] != i) {
            throw ParseError("leaf clusters must be a permutation of 0..k-1", 0);
        }
    }
    return tree;
}

/// Graphviz rendering: ellipses for cuts, boxes for clusters.
inline std::string tree_to_dot(const ThresholdTree& tree) {
    std::string out = "digraph ThresholdTree {\n";
    out += "  node [fontname=\"Helvetica\"];\n";
    for (NodeId id = 0; id < tree.node_count(); ++id) {
        const auto& node = tree.node(id);
        std::string label;
        if (node.leaf) {
            label = "cluster " + std::to_string(node.center) + "\\nsize=" +
                    std::to_string(node.points.size()) +
                    "\\nexplanation=" + std::to_string(explanation(tree, id).reduced_size());
            out += "  n" + std::to_string(id) + " [shape=box, label=\"" + label + "\"];\n";
        } else {
            label = "x[" + std::to_string(node.cut.dim) + "] ≤ " +
                    detail::dot_escape(detail::format_real(node.cut.theta)) +
                    "\\nn=" + std::to_string(node.n_points) +
                    ", mistakes=" + std::to_string(node.mistakes);
            out += "  n" + std::to_string(id) + " [shape=ellipse, label=\"" + label + "\"];\n";
        }
    }
    for (NodeId id = 0; id < tree.node_count(); ++id) {
        const auto& node = tree.node(id);
        if (node.leaf) {
            continue;
        }
        out += "  n" + std::to_string(id) + " -> n" + std::to_string(node.left) +
               " [label=\"≤\"];\n";
        out += "  n" + std::to_string(id) + " -> n" + std::to_string(node.right) +
               " [label=\">\"];\n";
    }
    out += "}\n";
    return out;
}

/// Dispatches on "json" or "dot"; anything else is an invalid_argument.
inline std::string export_tree(const ThresholdTree& tree, std::string_view format) {
    if (format == "json") {
        return tree_to_json(tree);
    }
    if (format == "dot") {
        return tree_to_dot(tree);
    }
    throw std::invalid_argument("unknown export format: " + std::string(format));
}

}  // namespace shallowtree

#endif  // SHALLOWTREE_IO_HPP
