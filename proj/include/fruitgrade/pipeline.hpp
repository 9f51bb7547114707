#pragma once

/**
 * @file pipeline.hpp
 * @brief End-to-end experiment: synthetic imaging, feature extraction, mass
 *        model selection, repeated classifier training, and report/plot
 *        emission. Every output is a pure function of (config, master seed).
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "anfis.hpp"
#include "classifiers.hpp"
#include "dataset.hpp"
#include "imaging.hpp"
#include "json.hpp"
#include "massmodel.hpp"
#include "stats.hpp"
#include "synthgen.hpp"

namespace fruitgrade::pipeline {

struct ExperimentConfig {
    int samples_per_variety = 49;
    double dimension_std_scale = 1.0; // < 1 separates the varieties
    double mass_rel_noise = 0.02;

    synthgen::RenderConfig render = [] {
        synthgen::RenderConfig r;
        r.mm_per_pixel = 0.25;
        r.image_width = 320;
        r.image_height = 320;
        r.noise_std = 8.0;
        r.blur_radius = 1;
        return r;
    }();
    double calib_target_mm = 20.0;

    dataset::SplitRatios ratios;
    int repeats = 10;
    std::uint64_t master_seed = 1;
    std::vector<std::string> models = {"mlp", "rbf", "anfis-grid", "anfis-sub", "anfis-fcm"};

    classifiers::MlpConfig mlp;
    classifiers::RbfConfig rbf = [] {
        classifiers::RbfConfig r;
        // experiment defaults for [0,1]-normalized inputs: a tight cluster
        // radius for enough hidden units and a spread matched to the unit
        // box (the library default of 80 degenerates there, see RbfConfig)
        r.sub_radius = 0.15;
        r.sigma = 1.0;
        return r;
    }();
    bool rbf_raw_inputs = false;
    anfis::EnsembleConfig anfis_grid = [] {
        anfis::EnsembleConfig c;
        c.method = anfis::RuleMethod::Grid;
        // the grid consequent system is underdetermined (rules x (d+1) >>
        // training rows); a small ridge keeps the consequents from exploding
        c.train.lse_ridge = 1e-4;
        return c;
    }();
    anfis::EnsembleConfig anfis_sub = [] {
        anfis::EnsembleConfig c;
        c.method = anfis::RuleMethod::Subtractive;
        return c;
    }();
    anfis::EnsembleConfig anfis_fcm = [] {
        anfis::EnsembleConfig c;
        c.method = anfis::RuleMethod::Fcm;
        return c;
    }();

    void validate() const {
        if (repeats < 1)
            throw std::invalid_argument("ExperimentConfig: repeats must be >= 1");
        if (models.empty())
            throw std::invalid_argument("ExperimentConfig: model roster is empty");
        if (std::abs(ratios.train + ratios.test + ratios.verify - 1.0) > 1e-9)
            throw std::invalid_argument("ExperimentConfig: split ratios must sum to 1");
        if (samples_per_variety < 3)
            throw std::invalid_argument("ExperimentConfig: need >= 3 samples per variety");
    }
};

inline std::uint64_t repeat_seed(std::uint64_t master, int repeat) {
    return Rng::derive(master, 10000 + static_cast<std::uint64_t>(repeat));
}

// ---- generation and extraction ----------------------------------------------

inline std::vector<synthgen::VarietyParams> scaled_varieties(double std_scale) {
    auto varieties = synthgen::default_varieties();
    for (auto& v : varieties) {
        v.length_std *= std_scale;
        v.width_std *= std_scale;
        v.thickness_std *= std_scale;
    }
    return varieties;
}

struct GeneratedFruit {
    std::string id;
    synthgen::GroundTruthFruit truth;
};

inline std::vector<GeneratedFruit> generate_dataset(const ExperimentConfig& cfg) {
    auto varieties = scaled_varieties(cfg.dimension_std_scale);
    std::vector<GeneratedFruit> fruits;
    std::uint64_t counter = 0;
    for (const auto& v : varieties) {
        for (int i = 0; i < cfg.samples_per_variety; ++i) {
            GeneratedFruit f;
            f.truth = synthgen::sample_fruit(v, Rng::derive(cfg.master_seed, counter),
                                             cfg.mass_rel_noise);
            std::ostringstream id;
            id << v.name << "_" << std::setw(3) << std::setfill('0') << i;
            f.id = id.str();
            fruits.push_back(std::move(f));
            ++counter;
        }
    }
    return fruits;
}

/// Renders a centered solid square of known size for scale calibration.
inline GrayImage render_calibration_target(const synthgen::RenderConfig& cfg, double size_mm) {
    cfg.validate();
    GrayImage img(cfg.image_width, cfg.image_height,
                  static_cast<std::uint8_t>(cfg.background_level));
    double half_px = size_mm / (2.0 * cfg.mm_per_pixel);
    double cx = (cfg.image_width - 1) / 2.0, cy = (cfg.image_height - 1) / 2.0;
    if (cx - half_px < 0 || cy - half_px < 0)
        throw std::runtime_error("render_calibration_target: target does not fit in frame");
    for (int y = static_cast<int>(std::ceil(cy - half_px));
         y <= static_cast<int>(std::floor(cy + half_px)); ++y)
        for (int x = static_cast<int>(std::ceil(cx - half_px));
             x <= static_cast<int>(std::floor(cx + half_px)); ++x)
            img.at(x, y) = static_cast<std::uint8_t>(cfg.foreground_level);
    return img;
}

inline imaging::CalibrationScale calibrate_from_target(const GrayImage& target_img,
                                                       double size_mm) {
    int k = imaging::otsu_threshold(target_img);
    auto mask = imaging::clean_silhouette(imaging::binarize(target_img, k));
    imaging::CalibrationScale unit{1.0, 1.0};
    auto m = imaging::measure_view(mask, unit);
    return imaging::calibrate(size_mm, size_mm, m.extent_h, m.extent_v);
}

/// Full silhouette metrology on one grayscale view.
inline imaging::ViewMeasurement measure_gray_view(const GrayImage& img,
                                                  const imaging::CalibrationScale& scale) {
    int k = imaging::otsu_threshold(img);
    auto mask = imaging::clean_silhouette(imaging::binarize(img, k));
    return imaging::measure_view(mask, scale);
}

/// Renders + measures one fruit; features = (L, W, T, PA1, PA2, PA3).
inline imaging::FruitFeatures extract_fruit(const synthgen::GroundTruthFruit& fruit,
                                            const synthgen::RenderConfig& cfg,
                                            const imaging::CalibrationScale& scale) {
    auto views = synthgen::render_views(fruit, cfg);
    auto m1 = measure_gray_view(views[0], scale);
    auto m2 = measure_gray_view(views[1], scale);
    auto m3 = measure_gray_view(views[2], scale);
    return imaging::assemble_features(m1, m2, m3);
}

/// Measured samples with the actual (balance) mass in the last feature slot.
inline std::vector<dataset::Sample> extract_samples(const std::vector<GeneratedFruit>& fruits,
                                                    const ExperimentConfig& cfg) {
    auto target = render_calibration_target(cfg.render, cfg.calib_target_mm);
    auto scale = calibrate_from_target(target, cfg.calib_target_mm);
    std::vector<dataset::Sample> samples;
    for (const auto& f : fruits) {
        auto feats = extract_fruit(f.truth, cfg.render, scale);
        dataset::Sample s;
        s.id = f.id;
        s.variety = f.truth.variety;
        s.features = {feats.length, feats.width,  feats.thickness, feats.pa1,
                      feats.pa2,    feats.pa3,    f.truth.mass_g};
        samples.push_back(std::move(s));
    }
    return samples;
}

// ---- repeated training -------------------------------------------------------

struct RepeatOutcome {
    int repeat = 0;
    std::uint64_t seed = 0;
    std::uint32_t mass_mask = 0;
    massmodel::RegressionMetrics mass_train;
    massmodel::RegressionMetrics mass_verify;
    std::map<std::string, classifiers::EvaluationReport> evals;
    bool completed = true;
    std::string error;
};

struct ModelSummary {
    std::string name;
    std::vector<double> mean_recall_pct; // per variety, averaged over repeats
    double mean_pct = 0;                 // mean of per-variety recalls
    double mean_accuracy_pct = 0;
};

struct ExperimentReport {
    std::vector<std::string> varieties;
    std::vector<ModelSummary> models;
    std::vector<RepeatOutcome> repeats;
    massmodel::LinearModel mass_model; // from the first completed repeat
    int incomplete_repeats = 0;
};

namespace detail {

inline Eigen::MatrixXd one_hot(const std::vector<int>& labels, int n_classes) {
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(labels.size()),
                                              n_classes);
    for (std::size_t i = 0; i < labels.size(); ++i)
        t(static_cast<Eigen::Index>(i), labels[i]) = 1.0;
    return t;
}

} // namespace detail

/// One repeat: split, fit/select the mass model on actual masses, replace
/// the mass feature with model predictions everywhere, normalize, train the
/// roster, evaluate on test.
inline RepeatOutcome run_one_repeat(const std::vector<dataset::Sample>& samples,
                                    const std::vector<std::string>& varieties,
                                    const ExperimentConfig& cfg, int repeat,
                                    massmodel::SearchResult* search_out = nullptr) {
    RepeatOutcome out;
    out.repeat = repeat;
    out.seed = repeat_seed(cfg.master_seed, repeat);

    auto sp = dataset::split(samples, cfg.ratios, out.seed);
    auto train_m = dataset::feature_matrix(samples, sp.train);
    auto test_m = dataset::feature_matrix(samples, sp.test);
    auto verify_m = dataset::feature_matrix(samples, sp.verify);

    // mass model on the six measured features vs actual mass
    auto search = massmodel::subset_search(train_m.leftCols(6), train_m.col(6),
                                           verify_m.leftCols(6), verify_m.col(6));
    out.mass_mask = search.best_mask;
    out.mass_train = search.best_train;
    out.mass_verify = search.best_verify;
    if (search_out)
        *search_out = search;

    // classifiers consume estimated mass only, in every partition
    auto with_estimated_mass = [&](Eigen::MatrixXd m) {
        m.col(6) = massmodel::predict_mass(search.best, Eigen::MatrixXd(m.leftCols(6)));
        return m;
    };
    Eigen::MatrixXd train_f = with_estimated_mass(train_m);
    Eigen::MatrixXd test_f = with_estimated_mass(test_m);
    Eigen::MatrixXd verify_f = with_estimated_mass(verify_m);

    auto norm = dataset::Normalizer::fit(train_f);
    Eigen::MatrixXd train_n = norm.apply(train_f);
    Eigen::MatrixXd test_n = norm.apply(test_f);
    Eigen::MatrixXd verify_n = norm.apply(verify_f);

    auto label_of = [&](int idx) {
        const auto& v = samples[static_cast<std::size_t>(idx)].variety;
        for (std::size_t k = 0; k < varieties.size(); ++k)
            if (varieties[k] == v)
                return static_cast<int>(k);
        throw std::runtime_error("run_one_repeat: unknown variety " + v);
    };
    std::vector<int> train_y, test_y, verify_y;
    for (int i : sp.train) train_y.push_back(label_of(i));
    for (int i : sp.test) test_y.push_back(label_of(i));
    for (int i : sp.verify) verify_y.push_back(label_of(i));
    const int n_classes = static_cast<int>(varieties.size());
    Eigen::MatrixXd train_t = detail::one_hot(train_y, n_classes);

    std::uint64_t model_stream = 0;
    for (const auto& name : cfg.models) {
        std::uint64_t mseed = Rng::derive(out.seed, 500 + model_stream++);
        classifiers::ScoreFn score;
        if (name == "mlp") {
            auto [model, rec] = classifiers::train_mlp(train_n, train_t, cfg.mlp, mseed);
            score = [model](const Eigen::VectorXd& x) { return model.forward(x); };
            out.evals[name] = classifiers::evaluate_classifier(score, test_n, test_y, n_classes);
        } else if (name == "rbf") {
            const Eigen::MatrixXd& tr = cfg.rbf_raw_inputs ? train_f : train_n;
            const Eigen::MatrixXd& te = cfg.rbf_raw_inputs ? test_f : test_n;
            auto model = classifiers::train_rbf(tr, train_t, cfg.rbf);
            score = [model](const Eigen::VectorXd& x) { return model.forward(x); };
            out.evals[name] = classifiers::evaluate_classifier(score, te, test_y, n_classes);
        } else if (name == "anfis-grid" || name == "anfis-sub" || name == "anfis-fcm") {
            const auto& acfg = name == "anfis-grid" ? cfg.anfis_grid
                               : name == "anfis-sub" ? cfg.anfis_sub
                                                     : cfg.anfis_fcm;
            auto ens = anfis::train_ensemble(train_n, train_y, n_classes, verify_n, verify_y,
                                             acfg, mseed);
            score = [ens](const Eigen::VectorXd& x) { return ens.score(x); };
            out.evals[name] = classifiers::evaluate_classifier(score, test_n, test_y, n_classes);
        } else {
            throw std::invalid_argument("run_one_repeat: unknown model '" + name + "'");
        }
    }
    return out;
}

inline ExperimentReport run_repeats(const std::vector<dataset::Sample>& samples,
                                    const ExperimentConfig& cfg,
                                    massmodel::SearchResult* first_search = nullptr) {
    ExperimentReport rep;
    for (const auto& v : scaled_varieties(cfg.dimension_std_scale))
        rep.varieties.push_back(v.name);

    bool have_mass_model = false;
    for (int r = 0; r < cfg.repeats; ++r) {
        RepeatOutcome outcome;
        try {
            massmodel::SearchResult search;
            outcome = run_one_repeat(samples, rep.varieties, cfg, r,
                                     (!have_mass_model && first_search) ? first_search : &search);
            if (!have_mass_model) {
                rep.mass_model = first_search ? first_search->best : search.best;
                have_mass_model = true;
            }
        } catch (const std::exception& e) {
            outcome.repeat = r;
            outcome.seed = repeat_seed(cfg.master_seed, r);
            outcome.completed = false;
            outcome.error = e.what();
            ++rep.incomplete_repeats;
        }
        rep.repeats.push_back(std::move(outcome));
    }

    const int n_classes = static_cast<int>(rep.varieties.size());
    for (const auto& name : cfg.models) {
        ModelSummary s;
        s.name = name;
        s.mean_recall_pct.assign(static_cast<std::size_t>(n_classes), 0.0);
        std::vector<int> counts(static_cast<std::size_t>(n_classes), 0);
        double acc_sum = 0;
        int acc_count = 0;
        for (const auto& rr : rep.repeats) {
            if (!rr.completed)
                continue;
            auto it = rr.evals.find(name);
            if (it == rr.evals.end())
                continue;
            for (int c = 0; c < n_classes; ++c) {
                double rc = it->second.recall[static_cast<std::size_t>(c)];
                if (std::isfinite(rc)) {
                    s.mean_recall_pct[static_cast<std::size_t>(c)] += 100.0 * rc;
                    ++counts[static_cast<std::size_t>(c)];
                }
            }
            acc_sum += 100.0 * it->second.accuracy;
            ++acc_count;
        }
        double mean_sum = 0;
        int mean_n = 0;
        for (int c = 0; c < n_classes; ++c) {
            if (counts[static_cast<std::size_t>(c)] > 0) {
                s.mean_recall_pct[static_cast<std::size_t>(c)] /=
                    counts[static_cast<std::size_t>(c)];
                mean_sum += s.mean_recall_pct[static_cast<std::size_t>(c)];
                ++mean_n;
            } else {
                s.mean_recall_pct[static_cast<std::size_t>(c)] = std::nan("");
            }
        }
        s.mean_pct = mean_n > 0 ? mean_sum / mean_n : 0.0;
        s.mean_accuracy_pct = acc_count > 0 ? acc_sum / acc_count : 0.0;
        rep.models.push_back(std::move(s));
    }
    return rep;
}

// ---- serialization of reports -------------------------------------------------

inline nlohmann::json report_to_json(const ExperimentReport& rep, const ExperimentConfig& cfg) {
    nlohmann::json j;
    j["varieties"] = rep.varieties;
    j["repeats_configured"] = cfg.repeats;
    j["master_seed"] = cfg.master_seed;
    j["incomplete_repeats"] = rep.incomplete_repeats;
    j["mass_model"] = massmodel::to_json(rep.mass_model);
    nlohmann::json models = nlohmann::json::array();
    for (const auto& m : rep.models) {
        nlohmann::json mj;
        mj["name"] = m.name;
        nlohmann::json recalls = nlohmann::json::object();
        for (std::size_t c = 0; c < rep.varieties.size(); ++c)
            recalls[rep.varieties[c]] = m.mean_recall_pct[c];
        mj["recall_pct"] = recalls;
        mj["mean_pct"] = m.mean_pct;
        mj["mean_accuracy_pct"] = m.mean_accuracy_pct;
        models.push_back(mj);
    }
    j["models"] = models;
    nlohmann::json reps = nlohmann::json::array();
    for (const auto& r : rep.repeats) {
        nlohmann::json rj;
        rj["repeat"] = r.repeat;
        rj["seed"] = r.seed;
        rj["completed"] = r.completed;
        if (!r.completed) {
            rj["error"] = r.error;
            reps.push_back(rj);
            continue;
        }
        rj["mass_mask"] = r.mass_mask;
        rj["mass_verify"] = massmodel::to_json(r.mass_verify);
        nlohmann::json evals = nlohmann::json::object();
        for (const auto& [name, ev] : r.evals) {
            nlohmann::json ej;
            ej["accuracy"] = ev.accuracy;
            ej["recall"] = ev.recall;
            std::vector<std::vector<int>> conf;
            for (Eigen::Index i = 0; i < ev.confusion.rows(); ++i) {
                std::vector<int> row;
                for (Eigen::Index c = 0; c < ev.confusion.cols(); ++c)
                    row.push_back(ev.confusion(i, c));
                conf.push_back(row);
            }
            ej["confusion"] = conf;
            evals[name] = ej;
        }
        rj["evals"] = evals;
        reps.push_back(rj);
    }
    j["repeat_results"] = reps;
    return j;
}

/// Human-readable table: models x (varieties..., Mean), percentages.
inline std::string report_to_text(const ExperimentReport& rep) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(1);
    os << "Classification results (mean per-variety recall %, averaged over repeats)\n\n";
    os << std::setw(24) << std::left << "Model";
    for (const auto& v : rep.varieties)
        os << std::setw(10) << std::right << v;
    os << std::setw(10) << std::right << "Mean" << "\n";
    for (const auto& m : rep.models) {
        os << std::setw(24) << std::left << m.name;
        for (double r : m.mean_recall_pct)
            os << std::setw(10) << std::right << r;
        os << std::setw(10) << std::right << m.mean_pct << "\n";
    }
    os << "\nReference mean accuracies for comparison: mlp 83.6, rbf 80.6, "
          "anfis-grid 87.5, anfis-sub 84.1, anfis-fcm 87.7\n";
    if (rep.incomplete_repeats > 0)
        os << "WARNING: " << rep.incomplete_repeats << " repeat(s) incomplete\n";
    return os.str();
}

// ---- disk artifacts -----------------------------------------------------------

inline void write_manifest_csv(const std::vector<GeneratedFruit>& fruits,
                               const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("write_manifest_csv: cannot open " + path);
    out << "id,variety,L_mm,W_mm,T_mm,mass_g,seed\n";
    out << std::setprecision(17);
    for (const auto& f : fruits)
        out << f.id << "," << f.truth.variety << "," << f.truth.length_mm << ","
            << f.truth.width_mm << "," << f.truth.thickness_mm << "," << f.truth.mass_g << ","
            << f.truth.seed << "\n";
}

inline void write_features_csv(const std::vector<dataset::Sample>& samples,
                               const std::string& path, bool with_mass) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("write_features_csv: cannot open " + path);
    out << "id,variety,L,W,T,PA1,PA2,PA3" << (with_mass ? ",mass_g" : "") << "\n";
    out << std::setprecision(17);
    for (const auto& s : samples) {
        out << s.id << "," << s.variety;
        for (int c = 0; c < 6; ++c)
            out << "," << s.features[c];
        if (with_mass)
            out << "," << s.features[6];
        out << "\n";
    }
}

inline void write_search_table_csv(const massmodel::SearchResult& search,
                                   const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("write_search_table_csv: cannot open " + path);
    out << "mask,features,failed,train_rmse,verify_rmse,verify_r2,verify_mean_error,"
           "verify_std_error\n";
    out << std::setprecision(17);
    static const char* kNames[6] = {"L", "W", "T", "PA1", "PA2", "PA3"};
    for (const auto& s : search.table) {
        out << s.mask << ",";
        bool first = true;
        for (int j = 0; j < 6; ++j)
            if ((s.mask >> j) & 1u) {
                out << (first ? "" : "+") << kNames[j];
                first = false;
            }
        if (s.failed) {
            out << ",1,,,,,\n";
            continue;
        }
        out << ",0," << s.train.rmse << "," << s.verify.rmse << "," << s.verify.r_squared << ","
            << s.verify.mean_error << "," << s.verify.std_error << "\n";
    }
}

struct RunPaths {
    std::filesystem::path root;
    std::filesystem::path manifest() const { return root / "manifest.csv"; }
    std::filesystem::path features() const { return root / "features.csv"; }
    std::filesystem::path images() const { return root / "images"; }
    std::filesystem::path report_json() const { return root / "report.json"; }
    std::filesystem::path report_txt() const { return root / "report.txt"; }
    std::filesystem::path mass_model() const { return root / "massmodel.json"; }
    std::filesystem::path search_table() const { return root / "search_table.csv"; }
};

/// Full experiment with all artifacts on disk. Set write_images = false to
/// skip the (large, replayable) PGM dump.
inline ExperimentReport run_experiment(const ExperimentConfig& cfg, const std::string& out_dir,
                                       bool write_images = true) {
    cfg.validate();
    RunPaths paths{out_dir};
    std::filesystem::create_directories(paths.root);

    auto fruits = generate_dataset(cfg);
    write_manifest_csv(fruits, paths.manifest().string());
    if (write_images) {
        std::filesystem::create_directories(paths.images());
        auto target = render_calibration_target(cfg.render, cfg.calib_target_mm);
        write_pgm(target, (paths.images() / "calibration.pgm").string());
        for (const auto& f : fruits) {
            auto views = synthgen::render_views(f.truth, cfg.render);
            for (int v = 0; v < 3; ++v)
                write_pgm(views[v],
                          (paths.images() / (f.id + "_v" + std::to_string(v + 1) + ".pgm"))
                              .string());
        }
    }

    auto samples = extract_samples(fruits, cfg);
    write_features_csv(samples, paths.features().string(), true);

    massmodel::SearchResult first_search;
    auto report = run_repeats(samples, cfg, &first_search);
    write_search_table_csv(first_search, paths.search_table().string());
    {
        std::ofstream out(paths.mass_model().string());
        nlohmann::json j = massmodel::to_json(report.mass_model);
        j["train"] = massmodel::to_json(first_search.best_train);
        j["verify"] = massmodel::to_json(first_search.best_verify);
        out << j.dump(2) << "\n";
    }
    {
        std::ofstream out(paths.report_json().string());
        out << report_to_json(report, cfg).dump(2) << "\n";
    }
    {
        std::ofstream out(paths.report_txt().string());
        out << report_to_text(report);
    }
    return report;
}

// ---- plot data -----------------------------------------------------------------

/// Writes plot-ready CSVs from a completed run directory: actual-vs-predicted
/// mass scatter, residual histogram (20 bins), and per-dimension
/// estimated-vs-actual scatters.
inline void emit_plots(const std::string& run_dir, int histogram_bins = 20) {
    RunPaths paths{run_dir};
    if (!std::filesystem::exists(paths.manifest()) || !std::filesystem::exists(paths.features()) ||
        !std::filesystem::exists(paths.mass_model()))
        throw std::runtime_error("emit_plots: missing run artifacts in " + run_dir);

    // manifest: id -> (L, W, T, mass)
    std::map<std::string, std::array<double, 4>> truth;
    {
        std::ifstream in(paths.manifest().string());
        std::string line;
        std::getline(in, line);
        while (std::getline(in, line)) {
            if (line.empty())
                continue;
            auto f = dataset::split_csv_line(line);
            truth[f[0]] = {std::stod(f[2]), std::stod(f[3]), std::stod(f[4]), std::stod(f[5])};
        }
    }
    auto samples = dataset::read_features_csv(paths.features().string());
    massmodel::LinearModel model;
    {
        std::ifstream in(paths.mass_model().string());
        nlohmann::json j;
        in >> j;
        model = massmodel::linear_model_from_json(j);
    }

    std::vector<double> residuals;
    {
        std::ofstream scatter((paths.root / "mass_scatter.csv").string());
        scatter << "id,actual_g,predicted_g\n" << std::setprecision(17);
        std::ofstream dims((paths.root / "dimension_scatter.csv").string());
        dims << "id,L_actual,L_estimated,W_actual,W_estimated,T_actual,T_estimated\n"
             << std::setprecision(17);
        for (const auto& s : samples) {
            auto it = truth.find(s.id);
            if (it == truth.end())
                throw std::runtime_error("emit_plots: id missing from manifest: " + s.id);
            Eigen::VectorXd feats(6);
            for (int c = 0; c < 6; ++c)
                feats[c] = s.features[c];
            double pred = massmodel::predict_mass(model, feats);
            scatter << s.id << "," << it->second[3] << "," << pred << "\n";
            residuals.push_back(pred - it->second[3]);
            dims << s.id << "," << it->second[0] << "," << s.features[0] << "," << it->second[1]
                 << "," << s.features[1] << "," << it->second[2] << "," << s.features[2] << "\n";
        }
    }

    double lo = *std::min_element(residuals.begin(), residuals.end());
    double hi = *std::max_element(residuals.begin(), residuals.end());
    if (hi <= lo)
        hi = lo + 1e-9;
    std::vector<int> counts(static_cast<std::size_t>(histogram_bins), 0);
    for (double r : residuals) {
        int b = static_cast<int>((r - lo) / (hi - lo) * histogram_bins);
        b = std::min(std::max(b, 0), histogram_bins - 1);
        ++counts[static_cast<std::size_t>(b)];
    }
    {
        std::ofstream hist((paths.root / "mass_residual_histogram.csv").string());
        hist << "bin_lo,bin_hi,count\n" << std::setprecision(17);
        for (int b = 0; b < histogram_bins; ++b)
            hist << lo + (hi - lo) * b / histogram_bins << ","
                 << lo + (hi - lo) * (b + 1) / histogram_bins << ","
                 << counts[static_cast<std::size_t>(b)] << "\n";
    }
    {
        double rm = stats::mean(residuals);
        double rs = residuals.size() > 1 ? stats::sample_std(residuals) : 0.0;
        std::ofstream summary((paths.root / "mass_residual_summary.json").string());
        nlohmann::json j{{"count", residuals.size()}, {"mean_g", rm}, {"std_g", rs}};
        summary << j.dump(2) << "\n";
    }
}

} // namespace fruitgrade::pipeline
