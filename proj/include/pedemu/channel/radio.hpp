#pragma once

#include "pedemu/geo/offset.hpp"
#include "pedemu/sim/time.hpp"

#include <cstddef>
#include <string>

namespace pedemu::channel
{
    using geo::SimPoint;

    struct RadioConfig
    {
        double carrier_ghz = 2.6;
        int n_rb = 20;
        double tx_power_dbm = 20.0;
        double enb_tx_power_dbm = 20.0;
        double h_ue = 1.5;
        double h_enb = 25.0;
        double rx_sensitivity_dbm = -90.0;
        double phy_rate_bps = 1e6;
        std::size_t mac_queue_bytes = 10000;
        std::size_t rlc_queue_bytes = 5'000'000;
        std::string rlc_mode = "UM";
        double d_min = 1.0;

        /// Throws std::invalid_argument on the first bad field.
        void validate() const;

        /// Distance at which the link budget exactly meets the sensitivity.
        [[nodiscard]] double max_range_m() const;
    };

    /// LOS urban-microcell pathloss, distance clamped below at d_min.
    double pathloss_db(double d, double fc_ghz, double d_min = 1.0);

    double rx_power_dbm(const RadioConfig &cfg, double d);
    bool can_receive(const RadioConfig &cfg, SimPoint tx, SimPoint rx);

    /// Payload bits over the PHY rate, rounded up to whole microseconds.
    sim::Duration airtime(const RadioConfig &cfg, std::size_t bytes);
} // namespace pedemu::channel
