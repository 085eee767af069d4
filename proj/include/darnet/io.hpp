#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "darnet/engine.hpp"
#include "darnet/model.hpp"

namespace darnet::io
{
using nlohmann::json;

constexpr int schema_version = 1;

//! Number in CSV form: 12 significant digits, '.' decimal point.
std::string format_number(double value);

/*!
 * CSV output with a leading "# config: {...}" line.
 *
 * Fields are separated by ',' and rows end in a bare LF.
 */
class CsvWriter
{
  public:
    CsvWriter(std::ostream& os, json const& config);

    void header(std::vector<std::string> const& names);

    template<class... Ts>
    void row(Ts const&... fields)
    {
        std::vector<std::string> cells{field(fields)...};
        write(cells);
    }

  private:
    std::ostream& os_;

    void write(std::vector<std::string> const& cells);

    static std::string field(double v) { return format_number(v); }
    static std::string field(int v) { return std::to_string(v); }
    static std::string field(long v) { return std::to_string(v); }
    static std::string field(std::size_t v) { return std::to_string(v); }
    static std::string field(bool v) { return v ? "1" : "0"; }
    static std::string field(std::string const& v) { return v; }
    static std::string field(char const* v) { return v; }
};

//! Rows of a trajectory under the header time,f,g,mean_load,lost,accepted;
//! a negative \c replica omits the leading replica column.
void write_trajectory_rows(CsvWriter& csv, Trajectory const& tr,
                           int replica = -1);

//! Document {"schema": 1, "config": ..., "result": ...} followed by LF.
void write_json(std::ostream& os, json const& config, json const& result);

json state_to_json(SystemState const& state);
SystemState state_from_json(json const& loads, int capacity, int sigma);

/*!
 * Read an experiment config.
 *
 * Accepts a plain JSON object, a JSON result document (its "config"
 * member), or a CSV result (its "# config:" line).
 */
json load_config(std::string const& path);
}  // namespace darnet::io
