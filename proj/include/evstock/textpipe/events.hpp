#pragma once

#include <filesystem>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "evstock/common/date.hpp"
#include "evstock/common/errors.hpp"
#include "evstock/common/text.hpp"
#include "evstock/textpipe/tokenize.hpp"

namespace evstock::textpipe {

struct Headline {
    Date date;
    std::string ticker;
    std::string text; // non-empty after trimming
};

/// (actor, action, object, date) extracted from one headline.
struct EventTuple {
    std::vector<std::string> actor;
    std::string action;
    std::vector<std::string> object;
    Date date;
};

/// Surface verb forms the extractor recognizes. One verb per line.
class VerbInventory {
public:
    static VerbInventory load(const std::filesystem::path& path) {
        VerbInventory inv;
        for (const auto& line : read_lines(path)) {
            auto word = trim(line);
            if (word.empty() || word.front() == '#') continue;
            inv.verbs_.emplace(word);
        }
        return inv;
    }

    void insert(std::string verb) { verbs_.insert(std::move(verb)); }
    bool contains(const std::string& word) const { return verbs_.count(word) > 0; }
    std::size_t size() const { return verbs_.size(); }

private:
    std::unordered_set<std::string> verbs_;
};

/// surface -> category verb map (`bought<TAB>buy` per line).
class VerbMap {
public:
    static VerbMap load(const std::filesystem::path& path) {
        VerbMap map;
        auto lines = read_lines(path);
        for (std::size_t li = 0; li < lines.size(); ++li) {
            std::string_view line = trim(lines[li]);
            if (line.empty() || line.front() == '#') continue;
            auto fields = split(line, '\t');
            if (fields.size() != 2) {
                throw DataError(path.string() + ":" + std::to_string(li + 1) +
                                ": expected 'surface<TAB>category'");
            }
            map.map_[std::string(trim(fields[0]))] = std::string(trim(fields[1]));
        }
        return map;
    }

    void set(std::string surface, std::string category) {
        map_[std::move(surface)] = std::move(category);
    }

    const std::string* category(const std::string& verb) const {
        auto it = map_.find(verb);
        return it == map_.end() ? nullptr : &it->second;
    }

private:
    std::unordered_map<std::string, std::string> map_;
};

/// Tab-separated `date<TAB>ticker<TAB>headline`, one per line.
inline std::vector<Headline> load_headlines(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) {
        throw DataError("headlines file not found: " + path.string());
    }
    std::vector<Headline> headlines;
    auto lines = read_lines(path);
    for (std::size_t li = 0; li < lines.size(); ++li) {
        const std::string where = path.string() + ":" + std::to_string(li + 1);
        if (trim(lines[li]).empty()) continue;
        auto fields = split(lines[li], '\t');
        if (fields.size() != 3) {
            throw DataError(where + ": expected 'date<TAB>ticker<TAB>headline'");
        }
        Headline h;
        try {
            h.date = Date::parse(trim(fields[0]));
        } catch (const DataError& e) {
            throw DataError(where + ": " + e.what());
        }
        h.ticker = std::string(trim(fields[1]));
        h.text = std::string(trim(fields[2]));
        if (h.text.empty()) throw DataError(where + ": empty headline text");
        headlines.push_back(std::move(h));
    }
    return headlines;
}

/// Rule-based open-IE over the token stream. Each verb occurrence seeds a
/// candidate: the verb chain extends greedily over "<verb> to <verb>" links
/// and resolves to its final verb; tokens before the chain become the actor
/// and tokens after it the object. Candidates missing an actor or object
/// are dropped and at most max_events are kept in verb-position order.
inline std::vector<EventTuple> extract_events(const Headline& headline,
                                              const VerbInventory& verbs,
                                              std::size_t max_events = 10) {
    const std::vector<std::string> tokens = tokenize(headline.text);
    std::vector<EventTuple> events;
    for (std::size_t i = 0; i < tokens.size() && events.size() < max_events; ++i) {
        if (!verbs.contains(tokens[i])) continue;
        std::size_t chain_end = i; // index of the chain's final verb
        while (chain_end + 2 < tokens.size() && tokens[chain_end + 1] == "to" &&
               verbs.contains(tokens[chain_end + 2])) {
            chain_end += 2;
        }
        EventTuple event;
        event.actor.assign(tokens.begin(), tokens.begin() + static_cast<std::ptrdiff_t>(i));
        event.action = tokens[chain_end];
        event.object.assign(tokens.begin() + static_cast<std::ptrdiff_t>(chain_end) + 1,
                            tokens.end());
        event.date = headline.date;
        if (event.actor.empty() || event.object.empty()) continue;
        events.push_back(std::move(event));
    }
    return events;
}

/// Replaces the action by its category verb when mapped; everything else
/// passes through untouched.
inline EventTuple generalize(EventTuple event, const VerbMap& verb_map) {
    if (const std::string* cat = verb_map.category(event.action)) {
        event.action = *cat;
    }
    return event;
}

} // namespace evstock::textpipe
