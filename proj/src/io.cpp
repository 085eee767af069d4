#include "darnet/io.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "darnet/errors.hpp"

namespace darnet::io
{
std::string format_number(double value)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", value);
    return buf;
}

CsvWriter::CsvWriter(std::ostream& os, json const& config) : os_(os)
{
    os_ << "# config: " << config.dump() << '\n';
}

void CsvWriter::header(std::vector<std::string> const& names)
{
    write(names);
}

void CsvWriter::write(std::vector<std::string> const& cells)
{
    for (std::size_t i = 0; i < cells.size(); ++i)
    {
        if (i)
            os_ << ',';
        os_ << cells[i];
    }
    os_ << '\n';
}

void write_trajectory_rows(CsvWriter& csv, Trajectory const& tr, int replica)
{
    for (auto const& s : tr.samples)
    {
        if (replica >= 0)
            csv.row(replica, s.time, s.f, s.g, s.mean_load, s.lost, s.accepted);
        else
            csv.row(s.time, s.f, s.g, s.mean_load, s.lost, s.accepted);
    }
}

void write_json(std::ostream& os, json const& config, json const& result)
{
    json doc;
    doc["schema"] = schema_version;
    doc["config"] = config;
    doc["result"] = result;
    os << doc.dump(2) << '\n';
}

json state_to_json(SystemState const& state)
{
    return json(std::vector<int>(state.loads().begin(), state.loads().end()));
}

SystemState state_from_json(json const& loads, int capacity, int sigma)
{
    if (!loads.is_array())
        throw InvalidParameter("state must be a JSON array of loads");
    std::vector<int> v;
    for (auto const& e : loads)
    {
        if (!e.is_number_integer())
            throw InvalidParameter("state loads must be integers");
        int l = e.get<int>();
        if (l < 0 || l > capacity)
            throw InvalidParameter("state load outside [0, K]");
        v.push_back(l);
    }
    return SystemState(std::move(v), capacity, sigma);
}

json load_config(std::string const& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw InvalidParameter("cannot open config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    std::string text = buf.str();

    std::string const tag = "# config: ";
    json doc;
    try
    {
        if (text.rfind(tag, 0) == 0)
        {
            auto eol = text.find('\n');
            doc = json::parse(text.substr(tag.size(), eol - tag.size()));
        }
        else
        {
            doc = json::parse(text);
            if (doc.is_object() && doc.contains("config")
                && doc["config"].is_object())
                doc = doc["config"];
        }
    }
    catch (json::parse_error const& e)
    {
        throw InvalidParameter("config file '" + path + "': " + e.what());
    }
    if (!doc.is_object())
        throw InvalidParameter("config file '" + path + "' is not an object");
    if (doc.contains("schema") && doc["schema"] != schema_version)
        throw InvalidParameter("unsupported config schema in '" + path + "'");
    return doc;
}
}  // namespace darnet::io
