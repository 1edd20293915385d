#include "hola/hola.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <numeric>
#include <optional>
#include <string>

#include "hola/bipartition.hpp"
#include "hola/laplace.hpp"
#include "hola/model_io.hpp"
#include "hola/quadrature.hpp"

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& message) { g_last_error = message; }

template <typename Fn>
int guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const hola::ConfigError& e) {
        set_error(e.what());
        return HOLA_ERR_PARSE;
    } catch (const hola::OracleError& e) {
        set_error(e.what());
        return HOLA_ERR_ORACLE;
    } catch (const std::invalid_argument& e) {
        set_error(e.what());
        return HOLA_ERR_INVALID_ARGUMENT;
    } catch (const std::exception& e) {
        set_error(e.what());
        return HOLA_ERR_NUMERIC;
    }
}

}  // namespace

struct hola_model {
    hola::ModelConfig config;
    std::optional<hola::Dataset> data;
    int parameterization = HOLA_PARAM_COLLAPSED;

    hola::GlmmGFunction objective() const {
        if (!data)
            throw std::invalid_argument(
                "model has no responses; simulate or load a dataset first");
        if (parameterization == HOLA_PARAM_ORIGINAL)
            return hola::GlmmGFunction(hola::build_original_model(config, *data));
        return hola::GlmmGFunction(hola::build_collapsed_model(config, *data));
    }
};

struct hola_fit {
    std::unique_ptr<hola::GlmmGFunction> objective;
    hola::LaplaceExpansion expansion;
    int order = 1;
};

extern "C" {

const char* hola_version(void) { return "0.1.0"; }

const char* hola_last_error(void) { return g_last_error.c_str(); }

void hola_free(void* ptr) { std::free(ptr); }

int hola_model_create_from_json(const char* json_text, hola_model** out) {
    return guarded([&] {
        if (!json_text || !out) {
            set_error("null argument");
            return HOLA_ERR_INVALID_ARGUMENT;
        }
        auto model = std::make_unique<hola_model>();
        model->config = hola::parse_model_config(json_text);
        *out = model.release();
        return HOLA_OK;
    });
}

int hola_model_create_from_file(const char* path, hola_model** out) {
    return guarded([&] {
        if (!path || !out) {
            set_error("null argument");
            return HOLA_ERR_INVALID_ARGUMENT;
        }
        auto model = std::make_unique<hola_model>();
        model->config = hola::load_model_config(path);
        *out = model.release();
        return HOLA_OK;
    });
}

void hola_model_destroy(hola_model* model) { delete model; }

int hola_model_dim(const hola_model* model, int* out_dim) {
    if (!model || !out_dim) {
        set_error("null argument");
        return HOLA_ERR_INVALID_ARGUMENT;
    }
    *out_dim = model->parameterization == HOLA_PARAM_ORIGINAL
                   ? model->config.n_clusters() +
                         std::accumulate(model->config.hierarchy.level_counts.begin(),
                                         model->config.hierarchy.level_counts.end(), 0)
                   : model->config.n_clusters();
    return HOLA_OK;
}

int hola_model_num_obs(const hola_model* model, int64_t* out_n) {
    if (!model || !out_n) {
        set_error("null argument");
        return HOLA_ERR_INVALID_ARGUMENT;
    }
    *out_n = model->config.n_obs();
    return HOLA_OK;
}

int hola_model_levels(const hola_model* model, int* out_levels) {
    if (!model || !out_levels) {
        set_error("null argument");
        return HOLA_ERR_INVALID_ARGUMENT;
    }
    *out_levels = model->config.hierarchy.levels;
    return HOLA_OK;
}

int hola_model_simulate(hola_model* model, uint64_t seed) {
    return guarded([&] {
        if (!model) {
            set_error("null model");
            return HOLA_ERR_INVALID_ARGUMENT;
        }
        model->data = hola::simulate_dataset(model->config, seed);
        return HOLA_OK;
    });
}

int hola_model_write_csv(const hola_model* model, const char* path) {
    return guarded([&] {
        if (!model || !path) {
            set_error("null argument");
            return HOLA_ERR_INVALID_ARGUMENT;
        }
        if (!model->data) {
            set_error("model has no dataset to write");
            return HOLA_ERR_INVALID_ARGUMENT;
        }
        hola::write_dataset_csv(model->config, *model->data, path);
        return HOLA_OK;
    });
}

int hola_model_read_csv(hola_model* model, const char* path) {
    return guarded([&] {
        if (!model || !path) {
            set_error("null argument");
            return HOLA_ERR_INVALID_ARGUMENT;
        }
        model->data = hola::read_dataset_csv(model->config, path);
        return HOLA_OK;
    });
}

int hola_model_set_parameterization(hola_model* model, int parameterization) {
    if (!model) {
        set_error("null model");
        return HOLA_ERR_INVALID_ARGUMENT;
    }
    if (parameterization != HOLA_PARAM_COLLAPSED && parameterization != HOLA_PARAM_ORIGINAL) {
        set_error("unknown parameterization selector");
        return HOLA_ERR_INVALID_ARGUMENT;
    }
    if (parameterization == HOLA_PARAM_ORIGINAL && model->config.hierarchy.levels == 2) {
        set_error("original parameterization requires a hierarchy with 3 or more levels");
        return HOLA_ERR_INVALID_ARGUMENT;
    }
    model->parameterization = parameterization;
    return HOLA_OK;
}

int hola_model_exact_loglik(const hola_model* model, int method, int nodes_per_dim,
                            double* out_value, double* out_error_estimate) {
    return guarded([&] {
        if (!model || !out_value) {
            set_error("null argument");
            return HOLA_ERR_INVALID_ARGUMENT;
        }
        hola::GlmmGFunction g = model->objective();
        hola::QuadratureSpec spec;
        spec.nodes_per_dim = nodes_per_dim;
        hola::QuadResult r;
        switch (method) {
            case HOLA_ORACLE_AUTO: r = hola::exact_loglik_auto(g, spec); break;
            case HOLA_ORACLE_FACTORIZED: r = hola::exact_loglik_factorized(g, spec); break;
            case HOLA_ORACLE_TENSOR: r = hola::exact_loglik_tensor(g, spec); break;
            default:
                set_error("unknown oracle method selector");
                return HOLA_ERR_INVALID_ARGUMENT;
        }
        *out_value = r.value;
        if (out_error_estimate) *out_error_estimate = r.refine_diff;
        if (!r.reliable) {
            set_error("quadrature refinement discrepancy above 1e-6; result unreliable");
            return HOLA_ERR_ORACLE;
        }
        return HOLA_OK;
    });
}

int hola_fit_create(const hola_model* model, int order, hola_fit** out) {
    return guarded([&] {
        if (!model || !out) {
            set_error("null argument");
            return HOLA_ERR_INVALID_ARGUMENT;
        }
        if (order < 1 || order > 3) {
            set_error("order must be between 1 and 3");
            return HOLA_ERR_INVALID_ARGUMENT;
        }
        auto fit = std::make_unique<hola_fit>();
        fit->objective = std::make_unique<hola::GlmmGFunction>(model->objective());
        Eigen::VectorXd u0 = Eigen::VectorXd::Zero(fit->objective->dim());
        fit->expansion = hola::expand(*fit->objective, order, u0);
        fit->order = order;
        *out = fit.release();
        return HOLA_OK;
    });
}

void hola_fit_destroy(hola_fit* fit) { delete fit; }

int hola_fit_log_integral(const hola_fit* fit, int k, double* out_value) {
    return guarded([&] {
        if (!fit || !out_value) {
            set_error("null argument");
            return HOLA_ERR_INVALID_ARGUMENT;
        }
        if (k < 1 || k > fit->order) {
            set_error("approximation order not computed by this fit");
            return HOLA_ERR_INVALID_ARGUMENT;
        }
        *out_value = fit->expansion.log_integral(k);
        return HOLA_OK;
    });
}

int hola_fit_level_term(const hola_fit* fit, int level, double* out_value) {
    if (!fit || !out_value) {
        set_error("null argument");
        return HOLA_ERR_INVALID_ARGUMENT;
    }
    auto it = fit->expansion.level_terms.find(level);
    if (it == fit->expansion.level_terms.end()) {
        set_error("level term not computed by this fit");
        return HOLA_ERR_INVALID_ARGUMENT;
    }
    *out_value = it->second;
    return HOLA_OK;
}

int hola_fit_mode_dim(const hola_fit* fit, int* out_dim) {
    if (!fit || !out_dim) {
        set_error("null argument");
        return HOLA_ERR_INVALID_ARGUMENT;
    }
    *out_dim = static_cast<int>(fit->expansion.u_hat.size());
    return HOLA_OK;
}

int hola_fit_mode(const hola_fit* fit, double* out_buffer, int buffer_len) {
    if (!fit || !out_buffer) {
        set_error("null argument");
        return HOLA_ERR_INVALID_ARGUMENT;
    }
    if (buffer_len < fit->expansion.u_hat.size()) {
        set_error("mode buffer too small");
        return HOLA_ERR_INVALID_ARGUMENT;
    }
    for (int i = 0; i < fit->expansion.u_hat.size(); ++i)
        out_buffer[i] = fit->expansion.u_hat[i];
    return HOLA_OK;
}

int hola_fit_condition_norms(const hola_fit* fit, int max_order,
                             double* out_deriv_norms, double* out_inv2_norm) {
    return guarded([&] {
        if (!fit || !out_deriv_norms || !out_inv2_norm) {
            set_error("null argument");
            return HOLA_ERR_INVALID_ARGUMENT;
        }
        if (max_order < 3 || max_order > fit->objective->truncation_order()) {
            set_error("max_order out of range");
            return HOLA_ERR_INVALID_ARGUMENT;
        }
        hola::ConditionReport report =
            hola::check_condition2(*fit->objective, fit->expansion.u_hat,
                                   fit->objective->default_normalizers(), max_order);
        for (int k = 3; k <= max_order; ++k) out_deriv_norms[k - 3] = report.deriv_norms[k];
        *out_inv2_norm = report.inv2_norm;
        return HOLA_OK;
    });
}

int hola_bipartition_catalog_csv(int max_level, char** out_csv) {
    return guarded([&] {
        if (!out_csv) {
            set_error("null argument");
            return HOLA_ERR_INVALID_ARGUMENT;
        }
        if (max_level < 1 || max_level > 2) {
            set_error("catalog levels 1..2 are supported");
            return HOLA_ERR_INVALID_ARGUMENT;
        }
        std::string csv = hola::catalog_csv(max_level);
        char* buffer = static_cast<char*>(std::malloc(csv.size() + 1));
        if (!buffer) {
            set_error("allocation failed");
            return HOLA_ERR_NUMERIC;
        }
        std::memcpy(buffer, csv.c_str(), csv.size() + 1);
        *out_csv = buffer;
        return HOLA_OK;
    });
}

}  // extern "C"
