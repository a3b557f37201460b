#include "plab/config.hpp"

#include "plab/error.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <array>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace plab
{
    namespace
    {
        namespace pt = boost::property_tree;

        const std::map<std::string, std::set<std::string>> &schema()
        {
            static const std::map<std::string, std::set<std::string>> keys{
                {"scenario",
                 {"num_iters", "sim_length", "delta_t", "num_assets", "master_seed", "var_alpha", "risk_free",
                  "box_length", "netmod_alpha", "methods", "cov_lookback", "detrended_lookback", "dpcca_ridge"}},
                {"generator", {"kind"}},
                {"gaussian", {"num_independent", "num_dependent", "base_mean", "base_std", "noise_std_ratio"}},
                {"gbm",
                 {"num_independent", "num_dependent", "drift", "volatility", "initial_value", "dt", "noise_std_ratio"}},
                {"garch",
                 {"num_independent", "num_dependent", "alpha0", "alpha1", "beta1", "noise_std_ratio", "burn_in"}},
                {"arfima",
                 {"num_pairs", "num_dependent", "coupling_weight", "rho1", "rho2", "kernel_truncation",
                  "noise_std_ratio", "kernel", "return_scale"}},
                {"shocks", {"max_shocks", "mixing_beta", "max_duration_fraction", "num_mixed_pairs"}},
                {"cla", {"lower_bound", "upper_bound", "target_return"}},
            };
            return keys;
        }

        std::string fmt(double v)
        {
            std::array<char, 32> buf{};
            const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
            return std::string(buf.data(), res.ptr);
        }

        std::string fmt(long long v) { return std::to_string(v); }
        std::string fmt(std::uint64_t v) { return std::to_string(v); }

        // Typed access to one section.
        class Section
        {
        public:
            Section(const pt::ptree &root, std::string name) : name_(std::move(name))
            {
                if (const auto child = root.get_child_optional(name_))
                    tree_ = &*child;
            }

            bool has(const std::string &key) const { return tree_ && tree_->get_child_optional(key); }

            std::string text(const std::string &key) const { return tree_->get<std::string>(key); }

            template <typename T>
            void read(const std::string &key, T &out) const
            {
                if (!has(key))
                    return;
                const std::string s = text(key);
                T v{};
                const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
                if (ec != std::errc{} || end != s.data() + s.size())
                    throw ConfigError(name_ + "." + key, "cannot parse '" + s + "'");
                out = v;
            }

            const std::string &name() const { return name_; }

        private:
            std::string name_;
            const pt::ptree *tree_ = nullptr;
        };

        pt::ptree parse_tree(std::string_view text)
        {
            pt::ptree root;
            std::istringstream in{std::string(text)};
            try
            {
                pt::read_ini(in, root);
            }
            catch (const pt::ini_parser_error &e)
            {
                throw ConfigError("config", e.message() + " at line " + std::to_string(e.line()));
            }
            for (const auto &[section, child] : root)
            {
                const auto it = schema().find(section);
                if (it == schema().end() || child.empty())
                    throw ConfigError(section, it == schema().end() ? "unknown section" : "keys must sit inside a section");
                for (const auto &[key, value] : child)
                    if (!it->second.contains(key))
                        throw ConfigError(section + "." + key, "unknown key");
            }
            return root;
        }

        void apply_override(pt::ptree &root, const std::string &assignment)
        {
            const auto eq = assignment.find('=');
            const std::string path = assignment.substr(0, eq);
            const auto dot = path.find('.');
            if (eq == std::string::npos || dot == std::string::npos || dot == 0 || dot + 1 == path.size())
                throw UsageError("override '" + assignment + "' is not of the form section.key=value");
            const std::string section = path.substr(0, dot);
            const std::string key = path.substr(dot + 1);
            const auto it = schema().find(section);
            if (it == schema().end() || !it->second.contains(key))
                throw ConfigError(path, "unknown key");
            root.put(pt::ptree::path_type(section + "/" + key, '/'), assignment.substr(eq + 1));
        }

        // Splits num_assets between the two column groups unless the file fixes them.
        void derive_counts(const Section &s, std::optional<Index> num_assets, Index &first, Index &second,
                           Index first_width, Index first_default_divisor, const char *first_key, const char *second_key)
        {
            const bool has_first = s.has(first_key);
            const bool has_second = s.has(second_key);
            if (!num_assets || (has_first && has_second))
                return;
            const Index n = *num_assets;
            if (!has_first && !has_second)
                first = n / first_default_divisor;
            else if (!has_first)
                first = (n - second) / first_width;
            if (!has_second)
                second = n - first_width * first;
        }

        template <typename C>
        void read_common_counts(const Section &s, C &c, std::optional<Index> num_assets)
        {
            s.read("num_independent", c.num_independent);
            s.read("num_dependent", c.num_dependent);
            s.read("noise_std_ratio", c.noise_std_ratio);
            derive_counts(s, num_assets, c.num_independent, c.num_dependent, 1, 2, "num_independent", "num_dependent");
        }

        ArfimaConfig read_arfima(const pt::ptree &root, std::optional<Index> num_assets)
        {
            const Section s(root, "arfima");
            ArfimaConfig c;
            s.read("num_pairs", c.num_pairs);
            s.read("num_dependent", c.num_dependent);
            s.read("coupling_weight", c.coupling_weight);
            s.read("rho1", c.rho1);
            s.read("rho2", c.rho2);
            s.read("kernel_truncation", c.kernel_truncation);
            s.read("noise_std_ratio", c.noise_std_ratio);
            s.read("return_scale", c.return_scale);
            if (s.has("kernel"))
            {
                const std::string k = s.text("kernel");
                if (k == "as_written")
                    c.kernel = ArfimaKernel::as_written;
                else if (k == "literature")
                    c.kernel = ArfimaKernel::literature;
                else
                    throw ConfigError("arfima.kernel", "expected 'as_written' or 'literature', got '" + k + "'");
            }
            derive_counts(s, num_assets, c.num_pairs, c.num_dependent, 2, 4, "num_pairs", "num_dependent");
            return c;
        }

        GeneratorConfig read_generator(const pt::ptree &root, std::optional<Index> num_assets)
        {
            const Section g(root, "generator");
            const std::string kind = g.has("kind") ? g.text("kind") : "gaussian";
            if (kind == "gaussian")
            {
                const Section s(root, "gaussian");
                GaussianConfig c;
                read_common_counts(s, c, num_assets);
                s.read("base_mean", c.base_mean);
                s.read("base_std", c.base_std);
                return c;
            }
            if (kind == "gbm")
            {
                const Section s(root, "gbm");
                GbmConfig c;
                read_common_counts(s, c, num_assets);
                s.read("drift", c.drift);
                s.read("volatility", c.volatility);
                s.read("initial_value", c.initial_value);
                s.read("dt", c.dt);
                return c;
            }
            if (kind == "garch")
            {
                const Section s(root, "garch");
                GarchConfig c;
                read_common_counts(s, c, num_assets);
                s.read("alpha0", c.alpha0);
                s.read("alpha1", c.alpha1);
                s.read("beta1", c.beta1);
                s.read("burn_in", c.burn_in);
                return c;
            }
            if (kind == "arfima")
                return read_arfima(root, num_assets);
            if (kind == "arfima_shocks")
            {
                const Section s(root, "shocks");
                ArfimaShockConfig c{read_arfima(root, num_assets), {}};
                s.read("max_shocks", c.shocks.max_shocks);
                s.read("mixing_beta", c.shocks.mixing_beta);
                s.read("max_duration_fraction", c.shocks.max_duration_fraction);
                s.read("num_mixed_pairs", c.shocks.num_mixed_pairs);
                return c;
            }
            throw ConfigError("generator.kind", "unknown generator '" + kind + "'");
        }

        std::vector<Method> read_methods(const std::string &list)
        {
            std::vector<Method> out;
            std::size_t start = 0;
            while (start <= list.size())
            {
                const auto comma = list.find(',', start);
                std::string item = list.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
                const auto first = item.find_first_not_of(" \t");
                const auto last = item.find_last_not_of(" \t");
                item = first == std::string::npos ? "" : item.substr(first, last - first + 1);
                if (!item.empty())
                    out.push_back(Method::parse(item));
                if (comma == std::string::npos)
                    break;
                start = comma + 1;
            }
            return out;
        }

        ScenarioConfig build(std::string_view text, const std::vector<std::string> &overrides)
        {
            pt::ptree root = parse_tree(text);
            for (const std::string &o : overrides)
                apply_override(root, o);

            ScenarioConfig cfg;
            const Section s(root, "scenario");
            std::optional<Index> num_assets;
            if (s.has("num_assets"))
            {
                Index n = 0;
                s.read("num_assets", n);
                num_assets = n;
            }
            s.read("num_iters", cfg.num_iters);
            s.read("sim_length", cfg.sim_length);
            s.read("delta_t", cfg.delta_t);
            s.read("master_seed", cfg.master_seed);
            s.read("var_alpha", cfg.var_alpha);
            s.read("risk_free", cfg.risk_free);
            s.read("box_length", cfg.box_length);
            s.read("netmod_alpha", cfg.netmod_alpha);
            s.read("dpcca_ridge", cfg.dpcca_ridge);
            if (s.has("methods"))
                cfg.methods = read_methods(s.text("methods"));
            if (s.has("cov_lookback"))
                cfg.cov_lookback = parse_lookback(s.text("cov_lookback"));
            if (s.has("detrended_lookback"))
                cfg.detrended_lookback = parse_lookback(s.text("detrended_lookback"));

            cfg.generator = read_generator(root, num_assets);
            cfg.num_assets = num_assets ? *num_assets : column_count(cfg.generator);

            const Section cla(root, "cla");
            cla.read("lower_bound", cfg.cla_lower);
            cla.read("upper_bound", cfg.cla_upper);
            if (cla.has("target_return") && cla.text("target_return") != "none" && !cla.text("target_return").empty())
            {
                double t = 0.0;
                cla.read("target_return", t);
                cfg.cla_target = t;
            }
            return cfg;
        }
    }

    ScenarioConfig parse_config(std::string_view text, const std::vector<std::string> &overrides)
    {
        ScenarioConfig cfg = build(text, overrides);
        validate(cfg);
        return cfg;
    }

    ScenarioConfig parse_backtest_config(std::string_view text, const std::vector<std::string> &overrides)
    {
        ScenarioConfig cfg = build(text, overrides);
        validate_backtest(cfg);
        return cfg;
    }

    ScenarioConfig load_config(const std::filesystem::path &path, const std::vector<std::string> &overrides)
    {
        std::ifstream in(path, std::ios::binary);
        if (!in)
            throw ConfigError("config", "cannot open " + path.string());
        std::ostringstream buffer;
        buffer << in.rdbuf();
        return parse_config(buffer.str(), overrides);
    }

    std::string echo_config(const ScenarioConfig &cfg)
    {
        std::ostringstream out;
        auto kv = [&](const char *key, const std::string &value) { out << key << " = " << value << '\n'; };
        auto count = [](Index v) { return fmt(static_cast<long long>(v)); };

        out << "[scenario]\n";
        kv("num_iters", count(cfg.num_iters));
        kv("sim_length", count(cfg.sim_length));
        kv("delta_t", count(cfg.delta_t));
        kv("num_assets", count(cfg.num_assets));
        kv("master_seed", fmt(cfg.master_seed));
        kv("var_alpha", fmt(cfg.var_alpha));
        kv("risk_free", fmt(cfg.risk_free));
        kv("box_length", count(cfg.box_length));
        kv("netmod_alpha", fmt(cfg.netmod_alpha));
        std::string methods;
        for (const Method &m : cfg.methods)
            methods += (methods.empty() ? "" : ",") + m.id();
        kv("methods", methods);
        kv("cov_lookback", std::string(to_string(cfg.cov_lookback)));
        kv("detrended_lookback", std::string(to_string(cfg.detrended_lookback)));
        kv("dpcca_ridge", fmt(cfg.dpcca_ridge));

        out << "\n[generator]\n";
        kv("kind", std::string(generator_name(cfg.generator)));

        auto arfima = [&](const ArfimaConfig &c) {
            out << "\n[arfima]\n";
            kv("num_pairs", count(c.num_pairs));
            kv("num_dependent", count(c.num_dependent));
            kv("coupling_weight", fmt(c.coupling_weight));
            kv("rho1", fmt(c.rho1));
            kv("rho2", fmt(c.rho2));
            kv("kernel_truncation", count(c.kernel_truncation));
            kv("noise_std_ratio", fmt(c.noise_std_ratio));
            kv("kernel", c.kernel == ArfimaKernel::as_written ? "as_written" : "literature");
            kv("return_scale", fmt(c.return_scale));
        };

        std::visit(
            [&](const auto &g) {
                using G = std::decay_t<decltype(g)>;
                if constexpr (std::is_same_v<G, GaussianConfig>)
                {
                    out << "\n[gaussian]\n";
                    kv("num_independent", count(g.num_independent));
                    kv("num_dependent", count(g.num_dependent));
                    kv("base_mean", fmt(g.base_mean));
                    kv("base_std", fmt(g.base_std));
                    kv("noise_std_ratio", fmt(g.noise_std_ratio));
                }
                else if constexpr (std::is_same_v<G, GbmConfig>)
                {
                    out << "\n[gbm]\n";
                    kv("num_independent", count(g.num_independent));
                    kv("num_dependent", count(g.num_dependent));
                    kv("drift", fmt(g.drift));
                    kv("volatility", fmt(g.volatility));
                    kv("initial_value", fmt(g.initial_value));
                    kv("dt", fmt(g.dt));
                    kv("noise_std_ratio", fmt(g.noise_std_ratio));
                }
                else if constexpr (std::is_same_v<G, GarchConfig>)
                {
                    out << "\n[garch]\n";
                    kv("num_independent", count(g.num_independent));
                    kv("num_dependent", count(g.num_dependent));
                    kv("alpha0", fmt(g.alpha0));
                    kv("alpha1", fmt(g.alpha1));
                    kv("beta1", fmt(g.beta1));
                    kv("noise_std_ratio", fmt(g.noise_std_ratio));
                    kv("burn_in", count(g.burn_in));
                }
                else if constexpr (std::is_same_v<G, ArfimaConfig>)
                    arfima(g);
                else
                {
                    arfima(g.arfima);
                    out << "\n[shocks]\n";
                    kv("max_shocks", count(g.shocks.max_shocks));
                    kv("mixing_beta", fmt(g.shocks.mixing_beta));
                    kv("max_duration_fraction", fmt(g.shocks.max_duration_fraction));
                    kv("num_mixed_pairs", count(g.shocks.num_mixed_pairs));
                }
            },
            cfg.generator);

        out << "\n[cla]\n";
        kv("lower_bound", fmt(cfg.cla_lower));
        kv("upper_bound", fmt(cfg.cla_upper));
        kv("target_return", cfg.cla_target ? fmt(*cfg.cla_target) : std::string("none"));
        return out.str();
    }
}
