#include "fedward/report.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "fedward/config.hpp"

namespace fedward {

using ordered_json = nlohmann::ordered_json;
using nlohmann::json;

namespace {

// Shortest round-trip decimal form, identical for identical doubles.
std::string fmt(double v) { return json(v).dump(); }

ordered_json round_to_json(const RoundReport& r) {
    ordered_json obj;
    obj["t"] = r.t;
    obj["selected"] = r.selected;
    obj["malicious_selected"] = r.malicious_selected;
    obj["accepted"] = r.accepted;
    if (r.aer) obj["aer"] = *r.aer; else obj["aer"] = nullptr;
    obj["asr"] = r.asr;
    obj["ma"] = r.ma;
    if (r.rho_clip) obj["rho_clip"] = *r.rho_clip; else obj["rho_clip"] = nullptr;
    if (r.eps) obj["eps"] = *r.eps; else obj["eps"] = nullptr;
    obj["fallback"] = r.fallback;
    return obj;
}

}  // namespace

std::string round_to_json_line(const RoundReport& report) {
    return round_to_json(report).dump();
}

RoundReport round_from_json_line(const std::string& line) {
    json obj = json::parse(line);
    RoundReport r;
    r.t = obj.at("t").get<std::size_t>();
    r.selected = obj.at("selected").get<std::vector<std::size_t>>();
    r.malicious_selected = obj.at("malicious_selected").get<std::size_t>();
    r.accepted = obj.at("accepted").get<std::vector<std::size_t>>();
    if (!obj.at("aer").is_null()) r.aer = obj.at("aer").get<double>();
    r.asr = obj.at("asr").get<double>();
    r.ma = obj.at("ma").get<double>();
    if (!obj.at("rho_clip").is_null()) r.rho_clip = obj.at("rho_clip").get<double>();
    if (!obj.at("eps").is_null()) r.eps = obj.at("eps").get<double>();
    r.fallback = obj.at("fallback").get<bool>();
    return r;
}

std::string summary_to_json(const RunSummary& summary) {
    ordered_json obj;
    obj["config_hash"] = summary.config_hash;
    obj["n_rounds"] = summary.n_rounds;
    obj["aasr"] = summary.aasr;
    if (summary.aer) obj["aer"] = *summary.aer; else obj["aer"] = nullptr;
    obj["ma_final"] = summary.ma_final;
    obj["ma_avg"] = summary.ma_avg;
    obj["fallback_rounds"] = summary.fallback_rounds;
    obj["rounds_file"] = "rounds.jsonl";
    return obj.dump(2) + "\n";
}

std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
    std::ostringstream out;
    out << "pdr,nir,defense,aasr,aer,ma_final,ma_avg\n";
    for (const auto& row : rows) {
        out << fmt(row.pdr) << ',' << fmt(row.nir) << ',' << to_string(row.defense) << ',';
        if (row.summary) {
            const auto& s = *row.summary;
            out << fmt(s.aasr) << ',' << (s.aer ? fmt(*s.aer) : "") << ',' << fmt(s.ma_final)
                << ',' << fmt(s.ma_avg);
        } else {
            out << ",,,";
        }
        out << '\n';
    }
    return out.str();
}

std::string rounds_to_csv(const std::vector<RoundReport>& rounds) {
    std::ostringstream out;
    out << "t,asr,ma,aer,n_selected,n_accepted,malicious_selected,rho_clip,eps,fallback\n";
    for (const auto& r : rounds) {
        out << r.t << ',' << fmt(r.asr) << ',' << fmt(r.ma) << ','
            << (r.aer ? fmt(*r.aer) : "") << ',' << r.selected.size() << ','
            << r.accepted.size() << ',' << r.malicious_selected << ','
            << (r.rho_clip ? fmt(*r.rho_clip) : "") << ',' << (r.eps ? fmt(*r.eps) : "") << ','
            << (r.fallback ? "true" : "false") << '\n';
    }
    return out.str();
}

void write_run_outputs(const std::string& dir, const RunSummary& summary) {
    std::filesystem::create_directories(dir);
    const auto rounds_path = std::filesystem::path(dir) / "rounds.jsonl";
    {
        std::ofstream f(rounds_path, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write " + rounds_path.string());
        for (const auto& r : summary.rounds) f << round_to_json_line(r) << '\n';
    }
    const auto summary_path = std::filesystem::path(dir) / "summary.json";
    std::ofstream f(summary_path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + summary_path.string());
    f << summary_to_json(summary);
}

std::vector<RoundReport> read_rounds_jsonl(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path);
    std::vector<RoundReport> rounds;
    std::string line;
    while (std::getline(f, line)) {
        if (!line.empty()) rounds.push_back(round_from_json_line(line));
    }
    return rounds;
}

std::string read_text_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace fedward
