#include "damarl/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

#include "damarl/error.hpp"

namespace damarl {

namespace {

constexpr std::array<char, 8> kMagic{'D', 'A', 'M', 'A', 'R', 'L', 'C', 'K'};

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

nlohmann::json blocks_json(const nn::ParamStore& p) {
    auto arr = nlohmann::json::array();
    for (const auto& b : p.blocks()) arr.push_back({{"name", b.name}, {"rows", b.rows}, {"cols", b.cols}});
    return arr;
}

void check_blocks(const nlohmann::json& listed, const nn::ParamStore& built, const std::string& what) {
    if (listed.size() != built.blocks().size()) throw ValidationError("checkpoint: " + what + " block count mismatch");
    for (std::size_t i = 0; i < listed.size(); ++i) {
        const auto& b = built.blocks()[i];
        if (listed[i].at("name").get<std::string>() != b.name || listed[i].at("rows").get<int>() != b.rows ||
            listed[i].at("cols").get<int>() != b.cols) {
            throw ValidationError("checkpoint: " + what + " block '" + b.name + "' does not match the architecture");
        }
    }
}

void write_values(std::ofstream& out, const nn::ParamStore& p) {
    out.write(reinterpret_cast<const char*>(p.values().data()),
              static_cast<std::streamsize>(p.values().size() * sizeof(double)));
}

void read_values(std::ifstream& in, nn::ParamStore& p) {
    in.read(reinterpret_cast<char*>(p.values().data()), static_cast<std::streamsize>(p.values().size() * sizeof(double)));
    if (!in) throw ValidationError("checkpoint: truncated parameter data");
}

} // namespace

void save_checkpoint(const std::string& path, const PolicySet& policy) {
    if (static_cast<int>(policy.actors.size()) != policy.layout.num_agents()) {
        throw ContractError("checkpoint: one actor per agent required");
    }
    if (!policy.critics.empty() && policy.critics.size() != policy.actors.size()) {
        throw ContractError("checkpoint: critics must be absent or one per agent");
    }
    nlohmann::json h;
    h["format_version"] = kCheckpointVersion;
    h["num_agents"] = policy.layout.num_agents();
    h["delays"] = policy.layout.delays();
    h["use_planned_actions"] = policy.layout.use_planned_actions();
    const auto& a = policy.actors.front().arch();
    h["actor"] = {{"hidden", a.hidden},       {"heads", a.heads},         {"head_dim", a.head_dim},
                  {"mix_dim", a.mix_dim},     {"alpha_max", a.bounds.alpha_max}, {"beta_max", a.bounds.beta_max},
                  {"u_min", a.bounds.u_min},  {"u_max", a.bounds.u_max}};
    h["actor_blocks"] = nlohmann::json::array();
    for (const auto& actor : policy.actors) h["actor_blocks"].push_back(blocks_json(actor.params()));
    if (!policy.critics.empty()) {
        h["critic"] = {{"input_dim", policy.critics.front().arch().input_dim},
                       {"hidden", policy.critics.front().arch().hidden}};
        h["critic_blocks"] = nlohmann::json::array();
        for (const auto& c : policy.critics) h["critic_blocks"].push_back(blocks_json(c.params()));
    }
    const std::string header = h.dump();

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("checkpoint: cannot write '" + path + "'");
    out.write(kMagic.data(), kMagic.size());
    const std::uint32_t version = kCheckpointVersion;
    const std::uint64_t len = header.size();
    out.write(reinterpret_cast<const char*>(&version), sizeof version);
    out.write(reinterpret_cast<const char*>(&len), sizeof len);
    out.write(header.data(), static_cast<std::streamsize>(header.size()));
    for (const auto& actor : policy.actors) write_values(out, actor.params());
    for (const auto& c : policy.critics) write_values(out, c.params());
    if (!out) throw IoError("checkpoint: write failed for '" + path + "'");
}

PolicySet load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("checkpoint: cannot open '" + path + "'");
    std::array<char, 8> magic{};
    in.read(magic.data(), magic.size());
    if (!in || magic != kMagic) throw ValidationError("checkpoint: '" + path + "' is not a checkpoint file");
    std::uint32_t version = 0;
    std::uint64_t len = 0;
    in.read(reinterpret_cast<char*>(&version), sizeof version);
    in.read(reinterpret_cast<char*>(&len), sizeof len);
    if (!in) throw ValidationError("checkpoint: truncated header");
    if (version != kCheckpointVersion) {
        throw ValidationError("checkpoint: unsupported format version " + std::to_string(version));
    }
    if (len > (1u << 26)) throw ValidationError("checkpoint: implausible header length");
    std::string header(len, '\0');
    in.read(header.data(), static_cast<std::streamsize>(len));
    if (!in) throw ValidationError("checkpoint: truncated header");

    PolicySet p;
    try {
        const auto h = nlohmann::json::parse(header);
        if (h.at("format_version").get<std::uint32_t>() != version) throw ValidationError("checkpoint: version mismatch");
        const int n = h.at("num_agents").get<int>();
        auto delays = h.at("delays").get<std::vector<int>>();
        if (n < 1 || static_cast<int>(delays.size()) != n) throw ValidationError("checkpoint: inconsistent agent count");
        p.layout = ObsLayout(std::move(delays), h.at("use_planned_actions").get<bool>());

        const auto& ja = h.at("actor");
        const auto& actor_blocks = h.at("actor_blocks");
        if (static_cast<int>(actor_blocks.size()) != n) throw ValidationError("checkpoint: actor count mismatch");
        for (int i = 0; i < n; ++i) {
            ActorArch arch;
            arch.input_dim = p.layout.actor_input_dim(i);
            arch.hidden = ja.at("hidden").get<int>();
            arch.heads = ja.at("heads").get<int>();
            arch.head_dim = ja.at("head_dim").get<int>();
            arch.mix_dim = ja.at("mix_dim").get<int>();
            arch.bounds = {ja.at("alpha_max").get<double>(), ja.at("beta_max").get<double>(),
                           ja.at("u_min").get<double>(), ja.at("u_max").get<double>()};
            Actor actor(arch, 0);
            check_blocks(actor_blocks[static_cast<std::size_t>(i)], actor.params(), "actor " + std::to_string(i));
            p.actors.push_back(std::move(actor));
        }
        if (h.contains("critic")) {
            const CriticArch arch{h["critic"].at("input_dim").get<int>(), h["critic"].at("hidden").get<int>()};
            if (arch.input_dim != p.layout.critic_input_dim()) throw ValidationError("checkpoint: critic input size mismatch");
            const auto& critic_blocks = h.at("critic_blocks");
            if (static_cast<int>(critic_blocks.size()) != n) throw ValidationError("checkpoint: critic count mismatch");
            for (int i = 0; i < n; ++i) {
                Critic c(arch, 0);
                check_blocks(critic_blocks[static_cast<std::size_t>(i)], c.params(), "critic " + std::to_string(i));
                p.critics.push_back(std::move(c));
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("checkpoint: malformed header: ") + e.what());
    }
    for (auto& a : p.actors) read_values(in, a.params());
    for (auto& c : p.critics) read_values(in, c.params());
    return p;
}

void require_compatible(const PolicySet& policy, const std::vector<int>& delays) {
    if (policy.layout.num_agents() != static_cast<int>(delays.size())) {
        throw ValidationError("checkpoint has " + std::to_string(policy.layout.num_agents()) +
                              " agents but the scenario has " + std::to_string(delays.size()));
    }
    if (policy.layout.delays() != delays) throw ValidationError("checkpoint delay steps differ from the scenario's");
}

} // namespace damarl
