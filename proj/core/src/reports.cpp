#include "blocknorm/reports.hpp"

#include <fstream>
#include <iomanip>
#include <iterator>
#include <sstream>

#include <nlohmann/json.hpp>

#include "blocknorm/errors.hpp"

namespace blocknorm {

using ojson = nlohmann::ordered_json;
using nlohmann::json;

namespace {

std::string dump(const ojson& j) {
    return j.dump(2) + "\n";
}

json parse(const std::string& text, const char* what) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw FormatError(std::string(what) + ": invalid JSON: " + e.what());
    }
}

template <class F>
auto guarded(const char* what, F&& f) {
    try {
        return f();
    } catch (const json::exception& e) {
        throw FormatError(std::string(what) + ": " + e.what());
    }
}

ojson eval_result_json(const EvalResult& r) {
    ojson j;
    j["auroc"] = r.auroc;
    j["fpr_at_tpr"] = r.fpr_at_tpr;
    j["target_tpr"] = r.target_tpr;
    j["n_id"] = r.n_id;
    j["n_ood"] = r.n_ood;
    return j;
}

}  // namespace

std::string to_json(const SelectionReport& report, bool include_norms) {
    ojson j;
    j["selected"] = report.selected;
    j["selected_index"] = report.selected_index;
    j["sample_count"] = report.sample_count;
    j["jigsaw_seed"] = report.jigsaw_seed;
    j["per_block"] = ojson::array();
    for (const auto& b : report.per_block) {
        ojson jb;
        jb["name"] = b.name;
        jb["mean_ratio"] = b.mean_ratio;
        jb["used"] = b.used;
        jb["skipped"] = b.skipped;
        j["per_block"].push_back(std::move(jb));
    }
    j["sample_indices"] = report.sample_indices;
    if (include_norms) {
        j["id_norms"] = report.id_norms;
        j["pseudo_norms"] = report.pseudo_norms;
    }
    return dump(j);
}

SelectionReport selection_report_from_json(const std::string& text) {
    json j = parse(text, "selection report");
    return guarded("selection report", [&] {
        SelectionReport r;
        r.selected = j.at("selected").get<std::string>();
        r.selected_index = j.at("selected_index").get<std::size_t>();
        r.sample_count = j.at("sample_count").get<std::size_t>();
        r.jigsaw_seed = j.at("jigsaw_seed").get<std::uint64_t>();
        for (const auto& jb : j.at("per_block")) {
            r.per_block.push_back({jb.at("name").get<std::string>(), jb.at("mean_ratio").get<double>(),
                                   jb.at("used").get<std::size_t>(), jb.at("skipped").get<std::size_t>()});
        }
        r.sample_indices = j.value("sample_indices", std::vector<std::size_t>{});
        r.id_norms = j.value("id_norms", std::vector<std::vector<double>>{});
        r.pseudo_norms = j.value("pseudo_norms", std::vector<std::vector<double>>{});
        return r;
    });
}

std::string to_json(const DetectorConfig& c) {
    ojson j;
    j["method"] = std::string(to_string(c.method));
    j["selected_block"] = c.selected_block ? ojson(*c.selected_block) : ojson(nullptr);
    j["threshold"] = c.threshold;
    j["temperature"] = c.temperature;
    j["react_clip"] = c.react_clip ? ojson(*c.react_clip) : ojson(nullptr);
    j["norm_replace"] = c.norm_replace;
    j["target_tpr"] = c.target_tpr;
    return dump(j);
}

DetectorConfig detector_config_from_json(const std::string& text) {
    json j = parse(text, "detector config");
    DetectorConfig c = guarded("detector config", [&] {
        DetectorConfig c;
        c.method = parse_score_method(j.at("method").get<std::string>());
        if (j.contains("selected_block") && !j["selected_block"].is_null()) {
            c.selected_block = j["selected_block"].get<std::string>();
        }
        c.threshold = j.at("threshold").get<double>();
        c.temperature = j.value("temperature", default_temperature(c.method));
        if (j.contains("react_clip") && !j["react_clip"].is_null()) c.react_clip = j["react_clip"].get<double>();
        c.norm_replace = j.value("norm_replace", false);
        c.target_tpr = j.value("target_tpr", kDefaultTargetTpr);
        return c;
    });
    c.validate();
    return c;
}

std::string to_json(const ScoreSet& s) {
    ojson j;
    j["method"] = std::string(to_string(s.method));
    j["higher_is_id"] = s.higher_is_id;
    j["id_scores"] = s.id_scores;
    j["ood_scores"] = ojson::object();
    for (const auto& [name, scores] : s.ood_scores) j["ood_scores"][name] = scores;
    return dump(j);
}

ScoreSet score_set_from_json(const std::string& text) {
    json j = parse(text, "score set");
    return guarded("score set", [&] {
        ScoreSet s;
        s.method = parse_score_method(j.at("method").get<std::string>());
        s.higher_is_id = j.value("higher_is_id", true);
        if (!s.higher_is_id) throw FormatError("score set: only higher_is_id = true is supported");
        s.id_scores = j.at("id_scores").get<std::vector<double>>();
        for (const auto& [name, scores] : j.at("ood_scores").items()) {
            s.ood_scores[name] = scores.get<std::vector<double>>();
        }
        return s;
    });
}

std::string to_json(const EvalReport& r) {
    ojson j;
    j["method"] = std::string(to_string(r.method));
    j["target_tpr"] = r.target_tpr;
    j["per_set"] = ojson::object();
    for (const auto& [name, res] : r.per_set) j["per_set"][name] = eval_result_json(res);
    j["average"] = {{"auroc", r.mean_auroc}, {"fpr_at_tpr", r.mean_fpr_at_tpr}};
    return dump(j);
}

EvalReport eval_report_from_json(const std::string& text) {
    json j = parse(text, "evaluation report");
    return guarded("evaluation report", [&] {
        EvalReport r;
        r.method = parse_score_method(j.at("method").get<std::string>());
        r.target_tpr = j.at("target_tpr").get<double>();
        for (const auto& [name, jr] : j.at("per_set").items()) {
            EvalResult e;
            e.auroc = jr.at("auroc").get<double>();
            e.fpr_at_tpr = jr.at("fpr_at_tpr").get<double>();
            e.target_tpr = jr.at("target_tpr").get<double>();
            e.n_id = jr.at("n_id").get<std::size_t>();
            e.n_ood = jr.at("n_ood").get<std::size_t>();
            r.per_set.emplace(name, e);
        }
        r.mean_auroc = j.at("average").at("auroc").get<double>();
        r.mean_fpr_at_tpr = j.at("average").at("fpr_at_tpr").get<double>();
        return r;
    });
}

std::string to_csv(const EvalReport& r) {
    std::ostringstream out;
    out << std::setprecision(17);
    out << "method,ood_set,auroc,fpr_at_tpr,target_tpr,n_id,n_ood\n";
    for (const auto& [name, e] : r.per_set) {
        out << to_string(r.method) << ',' << name << ',' << e.auroc << ',' << e.fpr_at_tpr << ','
            << e.target_tpr << ',' << e.n_id << ',' << e.n_ood << '\n';
    }
    out << to_string(r.method) << ",average," << r.mean_auroc << ',' << r.mean_fpr_at_tpr << ','
        << r.target_tpr << ",,\n";
    return out.str();
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out << text;
    out.flush();
    if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace blocknorm
