// Event-log to daily-game pipeline: parsing, player selection, tick grids,
// fee attribution, chi estimation, and the daily / reactive / inert game
// builders.
#pragma once

#include "clmm/amm.hpp"
#include "clmm/game.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace clmm {

enum class EventKind { swap, mint, burn };

struct Event {
    EventKind kind = EventKind::swap;
    std::int64_t timestamp = 0;  // unix seconds
    std::string sender;
    std::string position_id;     // mint/burn
    bool is_nft = false;         // mint
    double lower = 0;            // mint/burn
    double upper = 0;
    double liquidity = 0;
    double q_before = 0;         // swap
    double q_after = 0;
};

struct ParseIssue {
    int line = 0;
    std::string message;
};

struct ParsedEvents {
    std::vector<Event> events;
    std::vector<ParseIssue> issues;  // malformed rows, skipped
};

// CSV (with header) or JSON-lines, auto-detected from the first record.
// Malformed rows are collected in `issues`; a timestamp regression between
// two parsed events is a hard error naming both rows.
ParsedEvents parse_events(std::istream& in);

// Day boundary row of the prices file: date,q,p_x,p_y.
struct DayBoundary {
    std::string date;  // YYYY-MM-DD (UTC)
    std::int64_t timestamp = 0;  // midnight starting that date
    PricePoint prices;
};
std::vector<DayBoundary> parse_prices(std::istream& in);

// UTC civil-date helpers.
std::int64_t date_to_timestamp(const std::string& date);  // YYYY-MM-DD -> unix midnight
std::string timestamp_to_date(std::int64_t ts);

// Mint/burn fold of the event log.
class PoolState {
public:
    struct Record {
        std::string owner;  // sender of the first mint
        Position pos;
        bool is_nft = false;
        std::int64_t minted_at = 0;
        bool open = false;
    };

    // Applies mint/burn events (swaps are ignored). Returns a warning string
    // for inconsistent events (burn of unknown id, range mismatch), empty if ok.
    std::string apply(const Event& e);

    const std::map<std::string, Record>& positions() const { return positions_; }

private:
    std::map<std::string, Record> positions_;
};

struct SelectedPlayer {
    std::string id;      // minting sender
    double budget = 0;   // dollar value of retained positions at day start
    std::vector<Position> positions;
};

struct PlayerSelection {
    std::vector<SelectedPlayer> players;     // ranked by budget, descending
    std::vector<Position> nonplayer_positions;
    double retained_fraction = 1;            // of total day-start position value
    std::vector<std::string> warnings;
};

// Day-start snapshot -> players and non-player liquidity. Eligible positions
// are NFT-flagged, minted before the day, and not burned within it (pass the
// day's burned ids as touched_ids); eligible senders are ranked by day-start
// dollar value, cut to the top 30 and then to the shortest prefix holding
// >= 99% of the top-30 total.
PlayerSelection select_players(const PoolState& state,
                               const std::vector<std::string>& touched_ids,
                               std::int64_t day_start,
                               const PricePoint& day_open);

// Union grid of all position endpoints. Throws on empty input.
TickGrid build_tick_grid(const std::vector<Position>& player_positions,
                         const std::vector<Position>& nonplayer_positions);

// Active liquidity per atomic range: a position contributes where it covers
// the whole range (positions split at grid ticks are unaffected).
Eigen::ArrayXd rebucket(const std::vector<Position>& positions, const TickGrid& grid);

struct Trade {
    double q_before = 0;
    double q_after = 0;
};

struct FeeAttribution {
    Eigen::ArrayXd fees_usd;         // f_m
    Eigen::ArrayXd player_fees_usd;  // f^P_m
    Eigen::ArrayXd fees_x_tokens;    // token-denominated totals per range
    Eigen::ArrayXd fees_y_tokens;
    std::vector<int> dry_ranges;     // crossed with zero total liquidity
};

// Splits each trade's price path into per-range segments on the grid; the
// input amount of a segment follows the bonding curve (Y tokens when the
// price rises, X when it falls), fee = gamma * input, converted to dollars
// at day-end shifted prices. Player share of a range is kappa_m / J_m.
FeeAttribution attribute_fees(const std::vector<Trade>& trades, const TickGrid& grid,
                              const Eigen::ArrayXd& player_k,
                              const Eigen::ArrayXd& nonplayer_k, double gamma,
                              const PricePoint& day_end);

struct ChiEstimate {
    double chi = 0;
    bool covered = false;  // false: fees observed but none earned by players
};

// chi_m = kappa_m (f_m - f^P_m) / f^P_m; 0 when f_m = 0; uncovered when
// f_m > 0 and f^P_m = 0 (the share equation has no finite solution there).
ChiEstimate estimate_chi(double kappa_m, double fee_m, double player_fee_m);

struct DailyGame {
    std::string date;
    PricePoint open;   // raw day-start prices
    PricePoint close;  // raw day-end prices
    GameSpec spec;
    AtomicProfile gt;  // ground-truth player rows on spec's grid
    double retained_fraction = 1;  // player budget share kept by the cuts
    std::vector<std::string> warnings;
};

// Full single-day build from a day-start snapshot plus the day's swaps.
DailyGame build_daily_game(const PoolState& state,
                           const std::vector<std::string>& touched_ids,
                           const std::vector<Trade>& trades, const std::string& date,
                           const PricePoint& day_open, const PricePoint& day_close,
                           double gamma, double alpha);

// Reactive game: yesterday's grid, fees and chi; IL rates from the
// log-uniform fluctuation model (ratio r) around today's opening price;
// today's players and budgets.
GameSpec build_reactive_game(const DailyGame& prev, const DailyGame& today,
                             double fluctuation_r = 1.1);

// Inert game: one range spanning the history's tick hull expanded by E,
// history-averaged fees and non-player investment, IL rate from the
// log-uniform model with r = mean of max(q'/q, q/q') over the history.
GameSpec build_inert_game(const std::vector<const DailyGame*>& history, double expansion_e,
                          const DailyGame& today);

struct IngestOptions {
    double alpha = 1.0;
    std::string from_date;  // inclusive filters, empty = unbounded
    std::string to_date;
};

struct IngestResult {
    std::string pool_name;
    double gamma = 0;
    std::vector<DailyGame> days;
    std::vector<std::string> warnings;
    std::vector<ParseIssue> parse_issues;
};

// Event log + prices -> one DailyGame per day covered by consecutive price
// rows. Events before the first day seed the pool state.
IngestResult ingest_pool(std::istream& events_in, std::istream& prices_in,
                         const std::string& pool_name, double gamma,
                         const IngestOptions& opts = {});

}  // namespace clmm
