// Command-line front end: synth, extract, fit-mass, predict-mass, train,
// evaluate, run, stats, emit-plots.

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <fruitgrade/config.hpp>
#include <fruitgrade/pipeline.hpp>

namespace fs = std::filesystem;
using namespace fruitgrade;

namespace {

pipeline::ExperimentConfig make_config(const std::string& config_path) {
    return config_path.empty() ? pipeline::ExperimentConfig{} : config::load(config_path);
}

std::map<std::string, std::array<double, 4>> read_manifest_truth(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open manifest " + path);
    std::string line;
    std::getline(in, line);
    std::map<std::string, std::array<double, 4>> truth; // id -> L, W, T, mass
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        auto f = dataset::split_csv_line(line);
        truth[f[0]] = {std::stod(f[2]), std::stod(f[3]), std::stod(f[4]), std::stod(f[5])};
    }
    return truth;
}

/// Joins actual masses from the manifest into the samples' mass slot.
void join_masses(std::vector<dataset::Sample>& samples, const std::string& manifest_path) {
    auto truth = read_manifest_truth(manifest_path);
    for (auto& s : samples) {
        auto it = truth.find(s.id);
        if (it == truth.end())
            throw std::runtime_error("sample id missing from manifest: " + s.id);
        s.features[6] = it->second[3];
    }
}

nlohmann::json normalizer_to_json(const dataset::Normalizer& n) {
    auto vec = [](const Eigen::VectorXd& v) {
        return std::vector<double>(v.data(), v.data() + v.size());
    };
    return nlohmann::json{{"min", vec(n.feature_min())},
                          {"max", vec(n.feature_max())},
                          {"kept", n.kept()}};
}

dataset::Normalizer normalizer_from_json(const nlohmann::json& j) {
    auto mn = j.at("min").get<std::vector<double>>();
    auto mx = j.at("max").get<std::vector<double>>();
    auto kept = j.at("kept").get<std::vector<int>>();
    Eigen::VectorXd vmin = Eigen::Map<Eigen::VectorXd>(mn.data(), (Eigen::Index)mn.size());
    Eigen::VectorXd vmax = Eigen::Map<Eigen::VectorXd>(mx.data(), (Eigen::Index)mx.size());
    return dataset::Normalizer::restore(vmin, vmax, kept);
}

int cmd_synth(const std::string& config_path, const std::string& out_dir, std::uint64_t seed,
              bool have_seed, int samples, bool no_images) {
    auto cfg = make_config(config_path);
    if (have_seed)
        cfg.master_seed = seed;
    if (samples > 0)
        cfg.samples_per_variety = samples;

    pipeline::RunPaths paths{out_dir};
    fs::create_directories(paths.root);
    auto fruits = pipeline::generate_dataset(cfg);
    pipeline::write_manifest_csv(fruits, paths.manifest().string());
    if (!no_images) {
        fs::create_directories(paths.images());
        auto target = pipeline::render_calibration_target(cfg.render, cfg.calib_target_mm);
        write_pgm(target, (paths.images() / "calibration.pgm").string());
        for (const auto& f : fruits) {
            auto views = synthgen::render_views(f.truth, cfg.render);
            for (int v = 0; v < 3; ++v)
                write_pgm(views[v],
                          (paths.images() / (f.id + "_v" + std::to_string(v + 1) + ".pgm"))
                              .string());
        }
    }
    std::cout << "synth: " << fruits.size() << " fruits -> " << out_dir << "\n";
    return 0;
}

int cmd_extract(const std::string& manifest, const std::string& images,
                const std::string& out_csv, double calib_mm) {
    auto truth = read_manifest_truth(manifest);
    auto calib_img = read_pgm((fs::path(images) / "calibration.pgm").string());
    auto scale = pipeline::calibrate_from_target(calib_img, calib_mm);

    // preserve manifest row order
    std::ifstream in(manifest);
    std::string line;
    std::getline(in, line);
    std::vector<dataset::Sample> samples;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        auto f = dataset::split_csv_line(line);
        imaging::ViewMeasurement m[3];
        for (int v = 0; v < 3; ++v) {
            auto img = read_pgm(
                (fs::path(images) / (f[0] + "_v" + std::to_string(v + 1) + ".pgm")).string());
            m[v] = pipeline::measure_gray_view(img, scale);
        }
        auto feats = imaging::assemble_features(m[0], m[1], m[2]);
        dataset::Sample s;
        s.id = f[0];
        s.variety = f[1];
        s.features = {feats.length, feats.width, feats.thickness,
                      feats.pa1,    feats.pa2,   feats.pa3,       0.0};
        samples.push_back(std::move(s));
    }
    pipeline::write_features_csv(samples, out_csv, false);
    std::cout << "extract: " << samples.size() << " samples -> " << out_csv << "\n";
    return 0;
}

int cmd_fit_mass(const std::string& features, const std::string& manifest, std::uint64_t seed,
                 const std::string& out_model, const std::string& out_table) {
    auto samples = dataset::read_features_csv(features);
    join_masses(samples, manifest);
    dataset::SplitRatios ratios;
    auto sp = dataset::split(samples, ratios, seed);
    auto train_m = dataset::feature_matrix(samples, sp.train);
    auto verify_m = dataset::feature_matrix(samples, sp.verify);
    auto search = massmodel::subset_search(train_m.leftCols(6), train_m.col(6),
                                           verify_m.leftCols(6), verify_m.col(6));
    nlohmann::json j = massmodel::to_json(search.best);
    j["train"] = massmodel::to_json(search.best_train);
    j["verify"] = massmodel::to_json(search.best_verify);
    j["mask"] = search.best_mask;
    j["seed"] = seed;
    std::ofstream out(out_model);
    out << j.dump(2) << "\n";
    if (!out_table.empty())
        pipeline::write_search_table_csv(search, out_table);
    std::cout << "fit-mass: best mask " << search.best_mask << ", verify RMSE "
              << search.best_verify.rmse << " g, R2 " << search.best_verify.r_squared << "\n";
    return 0;
}

int cmd_predict_mass(const std::string& model_path, const std::string& features,
                     const std::string& out_csv) {
    std::ifstream in(model_path);
    if (!in)
        throw std::runtime_error("cannot open model " + model_path);
    nlohmann::json j;
    in >> j;
    auto model = massmodel::linear_model_from_json(j);
    auto samples = dataset::read_features_csv(features);
    std::ofstream out(out_csv);
    out << "id,predicted_mass_g\n" << std::setprecision(17);
    for (const auto& s : samples) {
        Eigen::VectorXd f(6);
        for (int c = 0; c < 6; ++c)
            f[c] = s.features[c];
        out << s.id << "," << massmodel::predict_mass(model, f) << "\n";
    }
    std::cout << "predict-mass: " << samples.size() << " predictions -> " << out_csv << "\n";
    return 0;
}

int cmd_train(const std::string& config_path, const std::string& features,
              const std::string& manifest, const std::string& model_name, std::uint64_t seed,
              const std::string& out_model) {
    auto cfg = make_config(config_path);
    cfg.master_seed = seed;
    cfg.models = {model_name};
    cfg.repeats = 1;

    auto samples = dataset::read_features_csv(features);
    join_masses(samples, manifest);
    auto varieties = dataset::class_labels(samples);

    // single repeat with this seed; persist everything evaluate needs
    auto sp = dataset::split(samples, cfg.ratios, pipeline::repeat_seed(cfg.master_seed, 0));
    auto train_m = dataset::feature_matrix(samples, sp.train);
    auto verify_m = dataset::feature_matrix(samples, sp.verify);
    auto search = massmodel::subset_search(train_m.leftCols(6), train_m.col(6),
                                           verify_m.leftCols(6), verify_m.col(6));
    auto with_est = [&](Eigen::MatrixXd m) {
        m.col(6) = massmodel::predict_mass(search.best, Eigen::MatrixXd(m.leftCols(6)));
        return m;
    };
    Eigen::MatrixXd train_f = with_est(train_m);
    Eigen::MatrixXd verify_f = with_est(verify_m);
    auto norm = dataset::Normalizer::fit(train_f);
    Eigen::MatrixXd train_n = norm.apply(train_f);
    Eigen::MatrixXd verify_n = norm.apply(verify_f);

    auto label_of = [&](int idx) {
        const auto& v = samples[(std::size_t)idx].variety;
        return (int)(std::find(varieties.begin(), varieties.end(), v) - varieties.begin());
    };
    std::vector<int> train_y, verify_y;
    for (int i : sp.train) train_y.push_back(label_of(i));
    for (int i : sp.verify) verify_y.push_back(label_of(i));
    const int n_classes = (int)varieties.size();
    Eigen::MatrixXd train_t(train_n.rows(), n_classes);
    train_t.setZero();
    for (Eigen::Index i = 0; i < train_n.rows(); ++i)
        train_t(i, train_y[(std::size_t)i]) = 1.0;

    nlohmann::json bundle;
    bundle["type"] = model_name;
    bundle["varieties"] = varieties;
    bundle["seed"] = seed;
    bundle["mass_model"] = massmodel::to_json(search.best);
    bundle["normalizer"] = normalizer_to_json(norm);
    bundle["rbf_raw_inputs"] = cfg.rbf_raw_inputs;

    std::uint64_t mseed = Rng::derive(pipeline::repeat_seed(cfg.master_seed, 0), 500);
    if (model_name == "mlp") {
        auto [model, rec] = classifiers::train_mlp(train_n, train_t, cfg.mlp, mseed);
        bundle["model"] = classifiers::to_json(model);
        bundle["train_rmse"] = rec.rmse;
        bundle["stop_reason"] = rec.stop_reason;
    } else if (model_name == "rbf") {
        auto model = classifiers::train_rbf(cfg.rbf_raw_inputs ? train_f : train_n, train_t,
                                            cfg.rbf);
        bundle["model"] = classifiers::to_json(model);
        if (model.sigma_warning)
            std::cerr << "train: warning: RBF sigma exceeds 10x the data diameter\n";
    } else if (model_name == "anfis-grid" || model_name == "anfis-sub" ||
               model_name == "anfis-fcm") {
        const auto& acfg = model_name == "anfis-grid" ? cfg.anfis_grid
                           : model_name == "anfis-sub" ? cfg.anfis_sub
                                                       : cfg.anfis_fcm;
        auto ens = anfis::train_ensemble(train_n, train_y, n_classes, verify_n, verify_y, acfg,
                                         mseed);
        nlohmann::json per_class = nlohmann::json::array();
        for (const auto& fis : ens.per_class)
            per_class.push_back(anfis::to_json(fis));
        bundle["model"] = per_class;
    } else {
        throw std::runtime_error("unknown model '" + model_name + "'");
    }
    std::ofstream out(out_model);
    out << bundle.dump(2) << "\n";
    std::cout << "train: " << model_name << " -> " << out_model << "\n";
    return 0;
}

int cmd_evaluate(const std::string& model_path, const std::string& features,
                 const std::string& out_json) {
    std::ifstream in(model_path);
    if (!in)
        throw std::runtime_error("cannot open model " + model_path);
    nlohmann::json bundle;
    in >> bundle;
    auto type = bundle.at("type").get<std::string>();
    auto varieties = bundle.at("varieties").get<std::vector<std::string>>();
    auto mass_model = massmodel::linear_model_from_json(bundle.at("mass_model"));
    auto norm = normalizer_from_json(bundle.at("normalizer"));
    bool rbf_raw = bundle.value("rbf_raw_inputs", false);

    auto samples = dataset::read_features_csv(features);
    std::vector<int> all(samples.size());
    std::iota(all.begin(), all.end(), 0);
    Eigen::MatrixXd m = dataset::feature_matrix(samples, all);
    m.col(6) = massmodel::predict_mass(mass_model, Eigen::MatrixXd(m.leftCols(6)));
    Eigen::MatrixXd mn = norm.apply(m);

    std::vector<int> labels;
    for (const auto& s : samples) {
        auto it = std::find(varieties.begin(), varieties.end(), s.variety);
        if (it == varieties.end())
            throw std::runtime_error("unknown variety in features: " + s.variety);
        labels.push_back((int)(it - varieties.begin()));
    }

    classifiers::ScoreFn score;
    if (type == "mlp") {
        auto model = classifiers::mlp_from_json(bundle.at("model"));
        score = [model](const Eigen::VectorXd& x) { return model.forward(x); };
    } else if (type == "rbf") {
        auto model = classifiers::rbf_from_json(bundle.at("model"));
        score = [model](const Eigen::VectorXd& x) { return model.forward(x); };
    } else {
        anfis::AnfisEnsemble ens;
        for (const auto& fj : bundle.at("model"))
            ens.per_class.push_back(anfis::fis_from_json(fj));
        score = [ens](const Eigen::VectorXd& x) { return ens.score(x); };
    }
    const Eigen::MatrixXd& eval_in = (type == "rbf" && rbf_raw) ? m : mn;
    auto rep = classifiers::evaluate_classifier(score, eval_in, labels, (int)varieties.size());

    std::cout << std::fixed << std::setprecision(1);
    std::cout << "evaluate: " << type << " accuracy " << 100.0 * rep.accuracy << "%\n";
    for (std::size_t c = 0; c < varieties.size(); ++c)
        std::cout << "  " << varieties[c] << " recall " << 100.0 * rep.recall[c] << "%\n";
    if (!out_json.empty()) {
        nlohmann::json j;
        j["accuracy"] = rep.accuracy;
        j["recall"] = rep.recall;
        std::vector<std::vector<int>> conf;
        for (Eigen::Index i = 0; i < rep.confusion.rows(); ++i)
            conf.emplace_back(rep.confusion.row(i).begin(), rep.confusion.row(i).end());
        j["confusion"] = conf;
        j["varieties"] = varieties;
        std::ofstream out(out_json);
        out << j.dump(2) << "\n";
    }
    return 0;
}

int cmd_run(const std::string& config_path, const std::string& out_dir, std::uint64_t seed,
            bool have_seed, int repeats, const std::string& models, bool no_images) {
    auto cfg = make_config(config_path);
    if (have_seed)
        cfg.master_seed = seed;
    if (repeats > 0)
        cfg.repeats = repeats;
    if (!models.empty())
        cfg.models = config::parse_list(models);
    auto report = pipeline::run_experiment(cfg, out_dir, !no_images);
    std::cout << pipeline::report_to_text(report);
    return report.incomplete_repeats == 0 ? 0 : 1;
}

int cmd_stats(const std::string& manifest, const std::string& features,
              const std::string& out_dir, double alpha) {
    auto samples = dataset::read_features_csv(features);
    join_masses(samples, manifest);
    auto varieties = dataset::class_labels(samples);
    fs::create_directories(out_dir);

    auto truth = read_manifest_truth(manifest);

    auto groups_of = [&](auto getter) {
        std::vector<std::vector<double>> groups(varieties.size());
        for (const auto& s : samples) {
            auto it = std::find(varieties.begin(), varieties.end(), s.variety);
            groups[(std::size_t)(it - varieties.begin())].push_back(getter(s));
        }
        return groups;
    };

    auto write_table = [&](const std::string& path,
                           const std::vector<std::pair<std::string,
                                                       std::function<double(const dataset::Sample&)>>>&
                               rows) {
        std::ofstream out(path);
        out << "measure";
        for (const auto& v : varieties)
            out << "," << v << "_mean," << v << "_std," << v << "_letters";
        out << ",anova_F,anova_p\n";
        out << std::setprecision(10);
        for (const auto& [name, getter] : rows) {
            auto groups = groups_of(getter);
            auto letters = stats::letter_groups(groups, alpha);
            auto anova = stats::anova_oneway(groups);
            out << name;
            for (std::size_t g = 0; g < groups.size(); ++g)
                out << "," << stats::mean(groups[g]) << "," << stats::sample_std(groups[g]) << ","
                    << letters[g];
            out << "," << anova.f_statistic << "," << anova.p_value << "\n";
        }
    };

    write_table((fs::path(out_dir) / "dimensions_table.csv").string(),
                {{"L", [](const dataset::Sample& s) { return s.features[0]; }},
                 {"W", [](const dataset::Sample& s) { return s.features[1]; }},
                 {"T", [](const dataset::Sample& s) { return s.features[2]; }}});
    write_table((fs::path(out_dir) / "areas_table.csv").string(),
                {{"PA1", [](const dataset::Sample& s) { return s.features[3]; }},
                 {"PA2", [](const dataset::Sample& s) { return s.features[4]; }},
                 {"PA3", [](const dataset::Sample& s) { return s.features[5]; }}});
    write_table((fs::path(out_dir) / "mass_table.csv").string(),
                {{"mass", [](const dataset::Sample& s) { return s.features[6]; }}});

    // estimated-vs-actual agreement per dimension
    std::vector<double> est[3], act[3];
    for (const auto& s : samples) {
        auto it = truth.find(s.id);
        if (it == truth.end())
            continue;
        for (int dimension = 0; dimension < 3; ++dimension) {
            est[dimension].push_back(s.features[dimension]);
            act[dimension].push_back(it->second[(std::size_t)dimension]);
        }
    }
    {
        std::ofstream out((fs::path(out_dir) / "dimension_agreement.csv").string());
        out << "dimension,r_squared\n" << std::setprecision(10);
        const char* names[3] = {"L", "W", "T"};
        for (int dimension = 0; dimension < 3; ++dimension)
            out << names[dimension] << "," << stats::agreement(est[dimension], act[dimension])
                << "\n";
    }
    std::cout << "stats: tables -> " << out_dir << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fruit variety grading pipeline: synthetic imaging, silhouette "
                 "metrology, mass modeling, and neuro-fuzzy classification"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "run", manifest, features, images, model_path,
                model_name = "mlp", out_csv, out_table, out_json, models_list;
    std::uint64_t seed = 1;
    int repeats = -1, samples = -1;
    double calib_mm = 20.0, alpha = 0.01;
    bool no_images = false;

    auto* synth = app.add_subcommand("synth", "Generate fruits, manifest, and view images");
    synth->add_option("--config", config_path);
    synth->add_option("--out-dir", out_dir);
    auto* synth_seed = synth->add_option("--seed", seed);
    synth->add_option("--samples", samples, "samples per variety");
    synth->add_flag("--no-images", no_images);

    auto* extract = app.add_subcommand("extract", "Measure features from rendered images");
    extract->add_option("--manifest", manifest)->required();
    extract->add_option("--images", images)->required();
    extract->add_option("--out", out_csv)->required();
    extract->add_option("--calib-size", calib_mm, "calibration target size, mm");

    auto* fitmass = app.add_subcommand("fit-mass", "Exhaustive subset search for the mass model");
    fitmass->add_option("--features", features)->required();
    fitmass->add_option("--manifest", manifest)->required();
    fitmass->add_option("--seed", seed);
    fitmass->add_option("--out", model_path)->default_val("massmodel.json");
    fitmass->add_option("--table", out_table);

    auto* predmass = app.add_subcommand("predict-mass", "Apply a mass model to features");
    predmass->add_option("--model", model_path)->required();
    predmass->add_option("--features", features)->required();
    predmass->add_option("--out", out_csv)->required();

    auto* train = app.add_subcommand("train", "Train one classifier");
    train->add_option("--config", config_path);
    train->add_option("--features", features)->required();
    train->add_option("--manifest", manifest)->required();
    train->add_option("--model", model_name, "mlp|rbf|anfis-grid|anfis-sub|anfis-fcm");
    train->add_option("--seed", seed);
    train->add_option("--out", out_json)->default_val("model.json");

    auto* evaluate = app.add_subcommand("evaluate", "Evaluate a trained classifier bundle");
    evaluate->add_option("--model", model_path)->required();
    evaluate->add_option("--features", features)->required();
    evaluate->add_option("--out", out_json);

    auto* run = app.add_subcommand("run", "End-to-end experiment with repeats");
    run->add_option("--config", config_path);
    run->add_option("--out-dir", out_dir);
    auto* run_seed = run->add_option("--seed", seed);
    run->add_option("--repeats", repeats);
    run->add_option("--models", models_list, "comma-separated roster");
    run->add_flag("--no-images", no_images);

    auto* statscmd = app.add_subcommand("stats", "Per-variety tables with significance letters");
    statscmd->add_option("--manifest", manifest)->required();
    statscmd->add_option("--features", features)->required();
    statscmd->add_option("--out-dir", out_dir);
    statscmd->add_option("--alpha", alpha);

    auto* plots = app.add_subcommand("emit-plots", "Plot-data CSVs from a run directory");
    plots->add_option("--run-dir", out_dir)->required();

    CLI11_PARSE(app, argc, argv);

    std::string stage = app.get_subcommands().front()->get_name();
    try {
        if (synth->parsed())
            return cmd_synth(config_path, out_dir, seed, synth_seed->count() > 0, samples,
                             no_images);
        if (extract->parsed())
            return cmd_extract(manifest, images, out_csv, calib_mm);
        if (fitmass->parsed())
            return cmd_fit_mass(features, manifest, seed, model_path, out_table);
        if (predmass->parsed())
            return cmd_predict_mass(model_path, features, out_csv);
        if (train->parsed())
            return cmd_train(config_path, features, manifest, model_name, seed, out_json);
        if (evaluate->parsed())
            return cmd_evaluate(model_path, features, out_json);
        if (run->parsed())
            return cmd_run(config_path, out_dir, seed, run_seed->count() > 0, repeats,
                           models_list, no_images);
        if (statscmd->parsed())
            return cmd_stats(manifest, features, out_dir, alpha);
        if (plots->parsed()) {
            pipeline::emit_plots(out_dir);
            std::cout << "emit-plots: -> " << out_dir << "\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "[" << stage << "] error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
