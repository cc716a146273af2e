#include "care/types.hpp"

namespace care {

std::string_view to_string(Method m) {
    switch (m) {
        case Method::Cqr: return "cqr";
        case Method::Acqr: return "acqr";
        case Method::CareVBias: return "care_vbias";
        case Method::CareEce: return "care_ece";
        case Method::MarkovOnly: return "markov_only";
        case Method::Bootstrap: return "bootstrap";
        case Method::Subsample: return "subsample";
    }
    return "unknown";
}

Method parse_method(std::string_view name) {
    if (name == "cqr") return Method::Cqr;
    if (name == "acqr") return Method::Acqr;
    if (name == "care_vbias") return Method::CareVBias;
    if (name == "care_ece") return Method::CareEce;
    if (name == "markov_only") return Method::MarkovOnly;
    if (name == "bootstrap") return Method::Bootstrap;
    if (name == "subsample") return Method::Subsample;
    throw ConfigError("unknown method '" + std::string(name) + "'");
}

std::string_view to_string(BiasSource s) {
    return s == BiasSource::VBias ? "vbias" : "ece";
}

BiasSource parse_bias_source(std::string_view name) {
    if (name == "vbias") return BiasSource::VBias;
    if (name == "ece") return BiasSource::Ece;
    throw ConfigError("unknown bias source '" + std::string(name) + "'");
}

void validate(const InstanceVolume& v) {
    const std::size_t n = v.g_b.size();
    if (v.g_a.size() != n)
        throw CorruptVolume("instance '" + v.id + "': channel lengths differ");
    if (n == 0)
        throw CorruptVolume("instance '" + v.id + "': no pixels");
    if (v.has_labels() && (v.y_a.size() != n || v.y_b.size() != n))
        throw CorruptVolume("instance '" + v.id + "': label lengths differ from pixel count");
    for (std::size_t i = 0; i < n; ++i) {
        if (!(v.g_a[i] >= 0.0 && v.g_a[i] <= 1.0) || !(v.g_b[i] >= 0.0 && v.g_b[i] <= 1.0))
            throw CorruptVolume("instance '" + v.id + "': probability outside [0,1]");
    }
    if (v.has_labels()) {
        for (std::size_t i = 0; i < n; ++i) {
            if (v.y_a[i] > 1 || v.y_b[i] > 1)
                throw CorruptVolume("instance '" + v.id + "': label is not 0/1");
            if (v.y_a[i] > v.y_b[i])
                throw CorruptVolume("instance '" + v.id + "': numerator label outside denominator region");
        }
    }
}

} // namespace care
