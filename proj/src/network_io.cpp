#include "lipopt/errors.hpp"
#include "lipopt/format.hpp"
#include "lipopt/network.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace lipopt {

using nlohmann::json;

namespace {

Index as_index(const json& j, const char* what)
{
    if (!j.is_number_integer())
        throw ParseError(std::string(what) + " must be an integer");
    return j.get<Index>();
}

} // namespace

Network load_network(std::istream& in, std::optional<Index> output_index)
{
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("network JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("layers") || !doc["layers"].is_array())
        throw ParseError("network JSON needs a \"layers\" array");
    Activation activation = Activation::Elu;
    if (doc.contains("activation")) {
        if (!doc["activation"].is_string())
            throw ParseError("\"activation\" must be a string");
        activation = parse_activation(doc["activation"].get<std::string>());
    }

    std::vector<WeightMatrix> layers;
    for (const auto& layer : doc["layers"]) {
        if (!layer.is_object() || !layer.contains("rows") || !layer.contains("cols") ||
            !layer.contains("entries") || !layer["entries"].is_array())
            throw ParseError("layer needs \"rows\", \"cols\" and \"entries\"");
        const Index rows = as_index(layer["rows"], "rows");
        const Index cols = as_index(layer["cols"], "cols");
        std::vector<WeightEntry> entries;
        for (const auto& e : layer["entries"]) {
            if (!e.is_array() || e.size() != 3 || !e[2].is_number())
                throw ParseError("entry must be [row, col, value]");
            entries.push_back({as_index(e[0], "row"), as_index(e[1], "col"), e[2].get<double>()});
        }
        layers.emplace_back(rows, cols, std::move(entries));
    }
    if (layers.empty())
        throw DimensionError("network has no layers");
    if (layers.back().rows() != 1 || output_index) {
        if (!output_index)
            throw DimensionError("network has " + std::to_string(layers.back().rows()) +
                                 " outputs; select one with an output index");
        return restrict_output(std::move(layers), activation, *output_index);
    }
    return Network(std::move(layers), activation);
}

Network load_network_file(const std::string& path, std::optional<Index> output_index)
{
    std::ifstream in(path);
    if (!in)
        throw ParseError("cannot open network file '" + path + "'");
    return load_network(in, output_index);
}

std::string save_network(const Network& net)
{
    std::ostringstream out;
    out << "{\n  \"activation\": \"" << to_string(net.activation()) << "\",\n  \"layers\": [\n";
    for (Index i = 0; i < net.depth(); ++i) {
        const auto& w = net.layer(i);
        out << "    {\"rows\": " << w.rows() << ", \"cols\": " << w.cols() << ", \"entries\": [";
        bool first = true;
        for (const auto& e : w.entries()) {
            out << (first ? "" : ", ") << '[' << e.row << ", " << e.col << ", " << format_double(e.value)
                << ']';
            first = false;
        }
        out << "]}" << (i + 1 < net.depth() ? "," : "") << '\n';
    }
    out << "  ]\n}\n";
    return out.str();
}

} // namespace lipopt
