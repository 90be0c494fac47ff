#include "pedemu/geo/utm.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <string>

namespace pedemu::geo
{
    namespace
    {
        constexpr double kA = 6378137.0;
        constexpr double kF = 1.0 / 298.257223563;

        constexpr double deg2rad(double d) { return d * std::numbers::pi / 180.0; }
        constexpr double rad2deg(double r) { return r * 180.0 / std::numbers::pi; }

        struct Series
        {
            double e;       // first eccentricity
            double radius;  // rectifying radius A
            std::array<double, 6> alpha;
            std::array<double, 6> beta;
        };

        Series make_series()
        {
            const double n = kF / (2.0 - kF);
            const double n2 = n * n, n3 = n2 * n, n4 = n3 * n, n5 = n4 * n, n6 = n5 * n;
            Series s{};
            s.e = std::sqrt(kF * (2.0 - kF));
            s.radius = kA / (1.0 + n) * (1.0 + n2 / 4.0 + n4 / 64.0 + n6 / 256.0);
            s.alpha = {
                n / 2 - 2 * n2 / 3 + 5 * n3 / 16 + 41 * n4 / 180 - 127 * n5 / 288 + 7891 * n6 / 37800,
                13 * n2 / 48 - 3 * n3 / 5 + 557 * n4 / 1440 + 281 * n5 / 630 - 1983433 * n6 / 1935360,
                61 * n3 / 240 - 103 * n4 / 140 + 15061 * n5 / 26880 + 167603 * n6 / 181440,
                49561 * n4 / 161280 - 179 * n5 / 168 + 6601661 * n6 / 7257600,
                34729 * n5 / 80640 - 3418889 * n6 / 1995840,
                212378941 * n6 / 319334400,
            };
            s.beta = {
                n / 2 - 2 * n2 / 3 + 37 * n3 / 96 - n4 / 360 - 81 * n5 / 512 + 96199 * n6 / 604800,
                n2 / 48 + n3 / 15 - 437 * n4 / 1440 + 46 * n5 / 105 - 1118711 * n6 / 3870720,
                17 * n3 / 480 - 37 * n4 / 840 - 209 * n5 / 4480 + 5569 * n6 / 90720,
                4397 * n4 / 161280 - 11 * n5 / 504 - 830251 * n6 / 7257600,
                4583 * n5 / 161280 - 108847 * n6 / 3991680,
                20648693 * n6 / 638668800,
            };
            return s;
        }

        const Series &series()
        {
            static const Series s = make_series();
            return s;
        }

        double normalize_lon(double lon)
        {
            double l = std::fmod(lon + 180.0, 360.0);
            if (l < 0.0)
            {
                l += 360.0;
            }
            return l - 180.0;
        }

        void check_latitude(double lat)
        {
            if (!std::isfinite(lat) || lat <= kMinLatitude || lat >= kMaxLatitude)
            {
                throw GeoError("latitude outside UTM band (-80, 84): " + std::to_string(lat));
            }
        }

        void check_zone(int zone)
        {
            if (zone < 1 || zone > 60)
            {
                throw GeoError("UTM zone out of range: " + std::to_string(zone));
            }
        }
    } // namespace

    int utm_zone(double lon_deg)
    {
        const double lon = normalize_lon(lon_deg);
        const int zone = static_cast<int>(std::floor((lon + 180.0) / 6.0)) + 1;
        return zone > 60 ? 60 : zone;
    }

    double central_meridian(int zone)
    {
        check_zone(zone);
        return -183.0 + 6.0 * zone;
    }

    UtmPoint wgs84_to_utm(const GeoPoint &p)
    {
        check_latitude(p.lat);
        if (!std::isfinite(p.lon))
        {
            throw GeoError("longitude is not finite");
        }
        return wgs84_to_utm(p, utm_zone(p.lon), p.lat >= 0.0 ? Hemisphere::North : Hemisphere::South);
    }

    UtmPoint wgs84_to_utm(const GeoPoint &p, int zone, Hemisphere hemisphere)
    {
        check_latitude(p.lat);
        check_zone(zone);
        if (!std::isfinite(p.lon))
        {
            throw GeoError("longitude is not finite");
        }
        const Series &s = series();
        const double phi = deg2rad(p.lat);
        const double lam = deg2rad(normalize_lon(p.lon - central_meridian(zone)));

        // Conformal latitude via tau' = tan(chi).
        const double sin_phi = std::sin(phi);
        const double t = std::sinh(std::atanh(sin_phi) - s.e * std::atanh(s.e * sin_phi));
        const double xi_p = std::atan2(t, std::cos(lam));
        const double eta_p = std::atanh(std::sin(lam) / std::sqrt(1.0 + t * t));

        double xi = xi_p;
        double eta = eta_p;
        for (int j = 1; j <= 6; ++j)
        {
            const double a = s.alpha[j - 1];
            xi += a * std::sin(2.0 * j * xi_p) * std::cosh(2.0 * j * eta_p);
            eta += a * std::cos(2.0 * j * xi_p) * std::sinh(2.0 * j * eta_p);
        }

        UtmPoint out;
        out.zone = zone;
        out.hemisphere = hemisphere;
        out.easting = kFalseEasting + kScaleFactor * s.radius * eta;
        out.northing = kScaleFactor * s.radius * xi + (hemisphere == Hemisphere::South ? kFalseNorthingSouth : 0.0);
        return out;
    }

    GeoPoint utm_to_wgs84(const UtmPoint &p)
    {
        check_zone(p.zone);
        if (p.hemisphere != Hemisphere::North && p.hemisphere != Hemisphere::South)
        {
            throw GeoError("invalid hemisphere");
        }
        if (!(p.easting > 100000.0 && p.easting < 900000.0))
        {
            throw GeoError("easting outside (100000, 900000): " + std::to_string(p.easting));
        }
        if (!(p.northing >= 0.0 && p.northing < 10000000.0))
        {
            throw GeoError("northing outside [0, 10000000): " + std::to_string(p.northing));
        }

        const Series &s = series();
        const double north =
            p.hemisphere == Hemisphere::South ? p.northing - kFalseNorthingSouth : p.northing;
        const double xi = north / (kScaleFactor * s.radius);
        const double eta = (p.easting - kFalseEasting) / (kScaleFactor * s.radius);

        double xi_p = xi;
        double eta_p = eta;
        for (int j = 1; j <= 6; ++j)
        {
            const double b = s.beta[j - 1];
            xi_p -= b * std::sin(2.0 * j * xi) * std::cosh(2.0 * j * eta);
            eta_p -= b * std::cos(2.0 * j * xi) * std::sinh(2.0 * j * eta);
        }

        const double sinh_eta = std::sinh(eta_p);
        const double cos_xi = std::cos(xi_p);
        const double tau_p = std::sin(xi_p) / std::sqrt(sinh_eta * sinh_eta + cos_xi * cos_xi);
        const double lam = std::atan2(sinh_eta, cos_xi);

        // Newton iteration for tau = tan(phi) from the conformal tau'.
        const double e2 = s.e * s.e;
        double tau = tau_p;
        for (int i = 0; i < 8; ++i)
        {
            const double sigma = std::sinh(s.e * std::atanh(s.e * tau / std::sqrt(1.0 + tau * tau)));
            const double tau_i = tau * std::sqrt(1.0 + sigma * sigma) - sigma * std::sqrt(1.0 + tau * tau);
            const double dtau = (tau_p - tau_i) / std::sqrt(1.0 + tau_i * tau_i) *
                                (1.0 + (1.0 - e2) * tau * tau) / ((1.0 - e2) * std::sqrt(1.0 + tau * tau));
            tau += dtau;
            if (std::abs(dtau) < 1e-14 * std::max(1.0, std::abs(tau)))
            {
                break;
            }
        }

        GeoPoint out;
        out.lat = rad2deg(std::atan(tau));
        out.lon = normalize_lon(central_meridian(p.zone) + rad2deg(lam));
        return out;
    }
} // namespace pedemu::geo
