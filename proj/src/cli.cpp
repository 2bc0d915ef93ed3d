#include "soar/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "soar/errors.hpp"
#include "soar/experiments.hpp"

namespace soar {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

enum class KeyType { Double, Int, Uint, Bool, String, DoubleList, StringList };

const std::map<std::string, KeyType>& schema() {
    static const std::map<std::string, KeyType> s = {
        {"example", KeyType::String},
        {"mesh.radius", KeyType::Double},
        {"mesh.fine_rings", KeyType::Int},
        {"mesh.coarse_rings", KeyType::Int},
        {"mesh.rings", KeyType::Int},
        {"mesh.file", KeyType::String},
        {"data.file", KeyType::String},
        {"noise.delta_prime", KeyType::Double},
        {"seed", KeyType::Uint},
        {"method", KeyType::String},
        {"soar.dt", KeyType::Double},
        {"soar.tau", KeyType::Double},
        {"soar.absorb_c0", KeyType::Bool},
        {"soar.eps0", KeyType::Double},
        {"soar.nmax", KeyType::Int},
        {"soar.eta", KeyType::Double},
        {"soar.r", KeyType::Double},
        {"soar.t0", KeyType::Double},
        {"soar.p0", KeyType::Double},
        {"soar.q0", KeyType::Double},
        {"drm.eta", KeyType::Double},
        {"drm.dt", KeyType::Double},
        {"drm.eps_coeff", KeyType::Double},
        {"nu.nu", KeyType::Double},
        {"nesterov.alpha", KeyType::Double},
        {"nesterov.omega", KeyType::Double},
        {"nesterov.grad_at", KeyType::String},
        {"sweep.axis", KeyType::String},
        {"sweep.values", KeyType::DoubleList},
        {"sweep.methods", KeyType::StringList},
        {"compare.delta_primes", KeyType::DoubleList},
        {"compare.methods", KeyType::StringList},
    };
    return s;
}

json default_config() {
    const RunParams d;
    json cfg;
    cfg["example"] = d.example;
    cfg["mesh.radius"] = d.radius;
    cfg["mesh.fine_rings"] = d.fine_rings;
    cfg["mesh.coarse_rings"] = d.coarse_rings;
    cfg["mesh.rings"] = 8;
    cfg["mesh.file"] = "";
    cfg["data.file"] = "";
    cfg["noise.delta_prime"] = d.delta_prime;
    cfg["seed"] = d.seed;
    cfg["method"] = d.method;
    cfg["soar.dt"] = d.dt;
    cfg["soar.tau"] = d.tau;
    cfg["soar.absorb_c0"] = d.absorb_c0;
    cfg["soar.eps0"] = d.eps0;
    cfg["soar.nmax"] = d.n_max;
    cfg["soar.eta"] = d.eta;
    cfg["soar.r"] = d.r;
    cfg["soar.t0"] = d.t0;
    cfg["soar.p0"] = d.p0;
    cfg["soar.q0"] = d.q0;
    cfg["drm.eta"] = d.drm_eta;
    cfg["drm.dt"] = d.drm_dt;
    cfg["drm.eps_coeff"] = d.drm_eps_coeff;
    cfg["nu.nu"] = d.nu;
    cfg["nesterov.alpha"] = d.nesterov_alpha;
    cfg["nesterov.omega"] = d.nesterov_omega;
    cfg["nesterov.grad_at"] = d.nesterov_grad_at;
    cfg["sweep.axis"] = "delta_prime";
    cfg["sweep.values"] = std::vector<double>{0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625};
    cfg["sweep.methods"] =
        std::vector<std::string>{"soar1", "soar2", "soar3", "soar4"};
    cfg["compare.delta_primes"] = std::vector<double>{0.05, 0.10, 0.20};
    cfg["compare.methods"] =
        std::vector<std::string>{"drm", "nu", "nesterov", "soar1", "soar2", "soar3", "soar4"};
    return cfg;
}

bool type_matches(const json& v, KeyType t) {
    switch (t) {
        case KeyType::Double: return v.is_number();
        case KeyType::Int: return v.is_number_integer();
        case KeyType::Uint: return v.is_number_integer() && (!v.is_number_integer() || v.get<long long>() >= 0 || v.is_number_unsigned());
        case KeyType::Bool: return v.is_boolean();
        case KeyType::String: return v.is_string();
        case KeyType::DoubleList:
            if (!v.is_array()) return false;
            for (const auto& e : v) {
                if (!e.is_number()) return false;
            }
            return true;
        case KeyType::StringList:
            if (!v.is_array()) return false;
            for (const auto& e : v) {
                if (!e.is_string()) return false;
            }
            return true;
    }
    return false;
}

void merge_config(json& cfg, const json& overlay) {
    if (!overlay.is_object()) throw ConfigError("config must be a JSON object");
    for (auto it = overlay.begin(); it != overlay.end(); ++it) {
        const auto s = schema().find(it.key());
        if (s == schema().end()) {
            throw ConfigError("unknown config key '" + it.key() + "'");
        }
        if (!type_matches(it.value(), s->second)) {
            throw ConfigError("config key '" + it.key() + "' has the wrong type");
        }
        cfg[it.key()] = it.value();
    }
}

std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(item);
    return out;
}

double parse_double(const std::string& key, const std::string& v) {
    std::size_t pos = 0;
    double d;
    try {
        d = std::stod(v, &pos);
    } catch (const std::exception&) {
        throw ConfigError("value for '" + key + "' is not a number: '" + v + "'");
    }
    if (pos != v.size()) throw ConfigError("value for '" + key + "' is not a number: '" + v + "'");
    return d;
}

void apply_set(json& cfg, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) {
        throw ConfigError("--set expects key=value, got '" + assignment + "'");
    }
    const std::string key = assignment.substr(0, eq);
    const std::string value = assignment.substr(eq + 1);
    const auto s = schema().find(key);
    if (s == schema().end()) throw ConfigError("unknown config key '" + key + "'");
    switch (s->second) {
        case KeyType::Double: cfg[key] = parse_double(key, value); break;
        case KeyType::Int: cfg[key] = static_cast<long long>(parse_double(key, value)); break;
        case KeyType::Uint: {
            try {
                cfg[key] = std::stoull(value);
            } catch (const std::exception&) {
                throw ConfigError("value for '" + key + "' is not a nonnegative integer");
            }
            break;
        }
        case KeyType::Bool:
            if (value == "true" || value == "1") cfg[key] = true;
            else if (value == "false" || value == "0") cfg[key] = false;
            else throw ConfigError("value for '" + key + "' must be true or false");
            break;
        case KeyType::String: cfg[key] = value; break;
        case KeyType::DoubleList: {
            std::vector<double> vals;
            for (const auto& item : split_commas(value)) vals.push_back(parse_double(key, item));
            cfg[key] = vals;
            break;
        }
        case KeyType::StringList: cfg[key] = split_commas(value); break;
    }
}

json load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file " + path);
    json j;
    in >> j;
    // A provenance record from a previous run nests the config.
    if (j.is_object() && j.contains("config")) return j["config"];
    return j;
}

RunParams params_from(const json& cfg) {
    RunParams p;
    p.example = cfg["example"].get<std::string>();
    p.radius = cfg["mesh.radius"].get<double>();
    p.fine_rings = cfg["mesh.fine_rings"].get<int>();
    p.coarse_rings = cfg["mesh.coarse_rings"].get<int>();
    p.delta_prime = cfg["noise.delta_prime"].get<double>();
    p.seed = cfg["seed"].get<std::uint64_t>();
    p.method = cfg["method"].get<std::string>();
    p.dt = cfg["soar.dt"].get<double>();
    p.tau = cfg["soar.tau"].get<double>();
    p.absorb_c0 = cfg["soar.absorb_c0"].get<bool>();
    p.eps0 = cfg["soar.eps0"].get<double>();
    p.n_max = cfg["soar.nmax"].get<int>();
    p.eta = cfg["soar.eta"].get<double>();
    p.r = cfg["soar.r"].get<double>();
    p.t0 = cfg["soar.t0"].get<double>();
    p.p0 = cfg["soar.p0"].get<double>();
    p.q0 = cfg["soar.q0"].get<double>();
    p.drm_eta = cfg["drm.eta"].get<double>();
    p.drm_dt = cfg["drm.dt"].get<double>();
    p.drm_eps_coeff = cfg["drm.eps_coeff"].get<double>();
    p.nu = cfg["nu.nu"].get<double>();
    p.nesterov_alpha = cfg["nesterov.alpha"].get<double>();
    p.nesterov_omega = cfg["nesterov.omega"].get<double>();
    p.nesterov_grad_at = cfg["nesterov.grad_at"].get<std::string>();
    return p;
}

ExperimentSpec spec_from(const json& cfg) {
    ExperimentSpec spec;
    spec.base = params_from(cfg);
    spec.axis = parse_axis(cfg["sweep.axis"].get<std::string>());
    spec.values = cfg["sweep.values"].get<std::vector<double>>();
    spec.methods = cfg["sweep.methods"].get<std::vector<std::string>>();
    spec.compare_delta_primes = cfg["compare.delta_primes"].get<std::vector<double>>();
    return spec;
}

fs::path ensure_out_dir(const std::string& out) {
    fs::path dir(out);
    fs::create_directories(dir);
    return dir;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string());
    out << content;
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

json provenance(const std::string& subcommand, const json& cfg) {
    json j;
    j["subcommand"] = subcommand;
    j["config"] = cfg;
    return j;
}

int cmd_mesh_gen(const json& cfg, const std::string& out) {
    const Mesh mesh =
        generate_disk_mesh(cfg["mesh.radius"].get<double>(), cfg["mesh.rings"].get<int>());
    const fs::path dir = ensure_out_dir(out);
    save_mesh(mesh, (dir / "mesh.txt").string());
    json prov = provenance("mesh gen", cfg);
    prov["results"] = {{"nodes", mesh.node_count()},
                       {"triangles", mesh.triangle_count()},
                       {"boundary_edges", mesh.boundary_edges.size()},
                       {"h", mesh.h}};
    write_file(dir / "mesh.json", prov.dump(2) + "\n");
    std::cout << "wrote " << (dir / "mesh.txt").string() << " (" << mesh.node_count()
              << " nodes, " << mesh.triangle_count() << " triangles)\n";
    return 0;
}

int cmd_mesh_info(const std::string& path) {
    const Mesh mesh = load_mesh(path);
    validate_mesh(mesh);
    double area = 0.0;
    for (int t = 0; t < mesh.triangle_count(); ++t) area += mesh.signed_area(t);
    const BoundaryParam param = boundary_param(mesh);
    std::cout << "nodes:          " << mesh.node_count() << "\n"
              << "triangles:      " << mesh.triangle_count() << "\n"
              << "boundary_edges: " << mesh.boundary_edges.size() << "\n"
              << "h:              " << mesh.h << "\n"
              << "area:           " << area << "\n"
              << "boundary_len:   " << param.length << "\n";
    return 0;
}

int cmd_forward(const json& cfg, const std::string& out) {
    RunParams params = params_from(cfg);
    // Only the fine mesh and the noise model are used here.
    if (params.radius <= 0.0) throw ConfigError("mesh.radius must be > 0");
    if (params.fine_rings < 1) throw ConfigError("mesh.fine_rings must be >= 1");
    if (params.delta_prime < 0.0) throw ConfigError("noise.delta_prime must be >= 0");
    const ExampleId example = parse_example(params.example);
    const Mesh fine = generate_disk_mesh(params.radius, params.fine_rings);
    const RegionMask region = mark_region(fine, example_region(example));
    BoundaryData data = make_measurement(fine, region, example);
    if (params.delta_prime > 0.0) {
        data = add_noise(data, params.delta_prime, params.seed);
    }
    const fs::path dir = ensure_out_dir(out);
    save_boundary_data(data, (dir / "data.txt").string());
    save_mesh(fine, (dir / "mesh_fine.txt").string());
    json prov = provenance("forward", cfg);
    prov["results"] = {{"delta", data.delta}, {"boundary_nodes", data.nodes.size()}};
    write_file(dir / "forward.json", prov.dump(2) + "\n");
    std::cout << "wrote " << (dir / "data.txt").string() << " (delta = " << data.delta << ")\n";
    return 0;
}

int cmd_solve(const json& cfg, const std::string& out, int /*jobs*/) {
    RunParams params = params_from(cfg);
    params.validate();
    const std::string data_file = cfg["data.file"].get<std::string>();
    const std::string mesh_file = cfg["mesh.file"].get<std::string>();

    RunRecord rec;
    double delta = 0.0;
    if (!data_file.empty()) {
        // External data: reconstruct on the given mesh, no ground truth.
        if (mesh_file.empty()) {
            throw ConfigError("data.file requires mesh.file (the reconstruction mesh)");
        }
        auto mesh = std::make_shared<const Mesh>(load_mesh(mesh_file));
        validate_mesh(*mesh);
        auto region = std::make_shared<const RegionMask>(
            mark_region(*mesh, example_region(parse_example(params.example))));
        BoundaryData data = load_boundary_data(data_file);
        FemSystem system =
            assemble_system(mesh, region).with_boundary_data(data.nodes, data.g1, data.g2);
        const BlockFactorization fact(system);
        delta = data.delta;
        if (is_soar_method(params.method)) {
            rec = run(system, fact, data, to_soar_config(params, system.m0()));
        } else {
            rec = run_baseline(system, fact, data, to_baseline_config(params, system.m0()));
        }
    } else {
        const Problem problem = prepare_problem(params);
        rec = run_single(problem, params, derive_seed(params.seed, 0));
        delta = problem.exact_measurement.delta;
    }

    const fs::path dir = ensure_out_dir(out);
    std::ostringstream csv;
    rec.write_csv(csv);
    write_file(dir / "run.csv", csv.str());

    json prov = provenance("solve", cfg);
    json results = {{"iternum", rec.iterations()},
                    {"reason", to_string(rec.reason)},
                    {"delta", delta},
                    {"rows", rec.rows.size()}};
    if (!rec.rows.empty() && rec.rows.back().l2_err) {
        results["l2err"] = *rec.rows.back().l2_err;
    }
    prov["results"] = results;
    write_file(dir / "run.json", prov.dump(2) + "\n");
    std::cout << "iterations: " << rec.iterations() << " (" << to_string(rec.reason) << ")\n";
    return 0;
}

int cmd_sweep(const json& cfg, const std::string& out, int jobs) {
    const ExperimentSpec spec = spec_from(cfg);
    const SweepTable table = run_sweep(spec, jobs);
    const fs::path dir = ensure_out_dir(out);
    write_file(dir / "sweep.csv", table.to_csv());
    json prov = provenance("sweep", cfg);
    json rows = json::array();
    for (const auto& row : table.rows) {
        json r = {{"sweep_value", row.value_label}, {"reason", row.reason}};
        if (row.ok) {
            r["l2err"] = row.l2err;
            r["iternum"] = row.iter_num;
        }
        rows.push_back(r);
    }
    prov["results"] = {{"rows", rows}};
    write_file(dir / "sweep.json", prov.dump(2) + "\n");
    std::cout << table.to_csv();
    return 0;
}

int cmd_compare(const json& cfg, const std::string& out, int jobs) {
    ExperimentSpec spec = spec_from(cfg);
    spec.methods = cfg["compare.methods"].get<std::vector<std::string>>();
    const CompareTable table = compare_methods(spec, jobs);
    const fs::path dir = ensure_out_dir(out);
    write_file(dir / "compare.csv", table.to_csv());
    json prov = provenance("compare", cfg);
    json rows = json::array();
    for (const auto& row : table.rows) {
        json r = {{"method", row.method},
                  {"delta_prime", row.delta_prime},
                  {"reason", row.reason}};
        if (row.ok) {
            r["l2err"] = row.l2err;
            r["iternum"] = row.iter_num;
        }
        rows.push_back(r);
    }
    prov["results"] = {{"rows", rows}};
    write_file(dir / "compare.json", prov.dump(2) + "\n");
    std::cout << table.to_csv();
    return 0;
}

} // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"Inverse source reconstruction via second-order asymptotical regularization"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "out";
    std::vector<std::string> sets;
    int jobs = 1;
    std::uint64_t seed = 0;
    bool seed_given = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "JSON config file (flat dotted keys)");
        cmd->add_option("--set", sets, "override a config key (key=value, repeatable)");
        cmd->add_option("--out", out_dir, "output directory")->capture_default_str();
        cmd->add_option("--jobs", jobs, "parallel rows for sweeps")->capture_default_str();
        cmd->add_option("--seed", seed, "master random seed")
            ->each([&](const std::string&) { seed_given = true; });
    };

    CLI::App* mesh_cmd = app.add_subcommand("mesh", "mesh file utilities");
    mesh_cmd->require_subcommand(1);
    CLI::App* mesh_gen = mesh_cmd->add_subcommand("gen", "generate a disk mesh file");
    add_common(mesh_gen);
    std::string mesh_info_path;
    CLI::App* mesh_info = mesh_cmd->add_subcommand("info", "print statistics of a mesh file");
    mesh_info->add_option("path", mesh_info_path, "mesh file")->required();

    CLI::App* forward = app.add_subcommand("forward", "generate synthetic boundary data");
    add_common(forward);
    CLI::App* solve = app.add_subcommand("solve", "run one reconstruction");
    add_common(solve);
    CLI::App* sweep = app.add_subcommand("sweep", "run a parameter sweep");
    add_common(sweep);
    CLI::App* compare = app.add_subcommand("compare", "compare methods on shared data");
    add_common(compare);

    std::vector<std::string> argv_rev(args.rbegin(), args.rend());
    try {
        app.parse(argv_rev);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        json cfg = default_config();
        try {
            if (!config_path.empty()) merge_config(cfg, load_config_file(config_path));
        } catch (const ConfigError&) {
            throw;
        } catch (const json::exception& e) {
            throw std::runtime_error("config file parse error: " + std::string(e.what()));
        }
        for (const auto& s : sets) apply_set(cfg, s);
        if (seed_given) cfg["seed"] = seed;
        if (jobs < 1) throw ConfigError("--jobs must be >= 1");

        if (mesh_gen->parsed()) return cmd_mesh_gen(cfg, out_dir);
        if (mesh_info->parsed()) return cmd_mesh_info(mesh_info_path);
        if (forward->parsed()) return cmd_forward(cfg, out_dir);
        if (solve->parsed()) return cmd_solve(cfg, out_dir, jobs);
        if (sweep->parsed()) return cmd_sweep(cfg, out_dir, jobs);
        if (compare->parsed()) return cmd_compare(cfg, out_dir, jobs);
        std::cerr << "error: no subcommand\n";
        return 1;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

} // namespace soar
