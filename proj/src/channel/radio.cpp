#include "pedemu/channel/radio.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pedemu::channel
{
    void RadioConfig::validate() const
    {
        if (!(carrier_ghz > 0.0))
        {
            throw std::invalid_argument("radio.carrier_ghz must be positive");
        }
        if (n_rb <= 0)
        {
            throw std::invalid_argument("radio.n_rb must be positive");
        }
        if (!(h_ue > 0.0) || !(h_enb > 0.0))
        {
            throw std::invalid_argument("radio antenna heights must be positive");
        }
        if (!(phy_rate_bps > 0.0))
        {
            throw std::invalid_argument("radio.phy_rate_bps must be positive");
        }
        if (mac_queue_bytes == 0 || rlc_queue_bytes == 0)
        {
            throw std::invalid_argument("radio queue sizes must be positive");
        }
        if (!(rx_sensitivity_dbm < tx_power_dbm))
        {
            throw std::invalid_argument("radio.rx_sensitivity_dbm must be below radio.tx_power_dbm");
        }
        if (rlc_mode != "UM")
        {
            throw std::invalid_argument("radio.rlc_mode: only UM is supported");
        }
        if (!(d_min > 0.0))
        {
            throw std::invalid_argument("radio.d_min must be positive");
        }
    }

    double RadioConfig::max_range_m() const
    {
        const double budget = tx_power_dbm - rx_sensitivity_dbm - 28.0 - 20.0 * std::log10(carrier_ghz);
        return std::max(d_min, std::pow(10.0, budget / 22.0));
    }

    double pathloss_db(double d, double fc_ghz, double d_min)
    {
        const double dc = std::max(d, d_min);
        return 22.0 * std::log10(dc) + 28.0 + 20.0 * std::log10(fc_ghz);
    }

    double rx_power_dbm(const RadioConfig &cfg, double d)
    {
        return cfg.tx_power_dbm - pathloss_db(d, cfg.carrier_ghz, cfg.d_min);
    }

    bool can_receive(const RadioConfig &cfg, SimPoint tx, SimPoint rx)
    {
        return rx_power_dbm(cfg, std::hypot(tx.x - rx.x, tx.y - rx.y)) >= cfg.rx_sensitivity_dbm;
    }

    sim::Duration airtime(const RadioConfig &cfg, std::size_t bytes)
    {
        const double us = static_cast<double>(bytes) * 8.0 / cfg.phy_rate_bps * 1e6;
        return sim::Duration(static_cast<std::int64_t>(std::ceil(us - 1e-9)));
    }
} // namespace pedemu::channel
