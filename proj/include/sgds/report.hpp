#pragma once

#include <cstdio>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace sgds {

// 17 significant digits: enough to round-trip any double exactly.
inline std::string fmt17(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

namespace detail {

inline std::string json_escape(const std::string& s)
{
    std::string out;
    out.reserve(s.size() + 2);
    for (char ch : s) {
        switch (ch) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            default:
                if (static_cast<unsigned char>(ch) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "\\u%04x", ch);
                    out += buf;
                } else {
                    out += ch;
                }
        }
    }
    return out;
}

}  // namespace detail

struct ReportRecord {
    std::string quantity;
    // parameter name -> formatted value; numeric values should use fmt17
    std::vector<std::pair<std::string, std::string>> params;
    double value_re = 0.0;
    std::optional<double> value_im;
    std::optional<double> error_est;
    std::optional<bool> pass;
    std::string paper_ref;

    std::string to_json() const
    {
        std::string out = "{\"quantity\":\"" + detail::json_escape(quantity) + "\",\"params\":{";
        for (std::size_t i = 0; i < params.size(); ++i) {
            if (i) out += ',';
            out += '"' + detail::json_escape(params[i].first) + "\":\""
                   + detail::json_escape(params[i].second) + '"';
        }
        out += "},\"value_re\":" + fmt17(value_re);
        out += ",\"value_im\":" + (value_im ? fmt17(*value_im) : std::string("null"));
        out += ",\"error_est\":" + (error_est ? fmt17(*error_est) : std::string("null"));
        out += ",\"pass\":" + (pass ? std::string(*pass ? "true" : "false") : std::string("null"));
        out += ",\"paper_ref\":\"" + detail::json_escape(paper_ref) + "\"}";
        return out;
    }
};

struct Report {
    std::vector<ReportRecord> records;

    bool all_pass() const
    {
        for (const auto& r : records)
            if (r.pass && !*r.pass) return false;
        return true;
    }

    std::string to_json_lines() const
    {
        std::string out;
        for (const auto& r : records) out += r.to_json() + "\n";
        return out;
    }

    std::string to_csv() const
    {
        auto cell = [](const std::string& s) {
            std::string q = "\"";
            for (char ch : s) {
                if (ch == '"') q += "\"\"";
                else q += ch;
            }
            return q + "\"";
        };
        std::string out = "quantity,params,value_re,value_im,error_est,pass,paper_ref\n";
        for (const auto& r : records) {
            std::string ps;
            for (std::size_t i = 0; i < r.params.size(); ++i) {
                if (i) ps += ';';
                ps += r.params[i].first + "=" + r.params[i].second;
            }
            out += cell(r.quantity) + ',' + cell(ps) + ',' + fmt17(r.value_re) + ',';
            out += (r.value_im ? fmt17(*r.value_im) : "") + std::string(",");
            out += (r.error_est ? fmt17(*r.error_est) : "") + std::string(",");
            out += (r.pass ? std::string(*r.pass ? "true" : "false") : "") + std::string(",");
            out += cell(r.paper_ref) + "\n";
        }
        return out;
    }
};

}  // namespace sgds
