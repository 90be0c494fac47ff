"""Regenerates utm_reference.csv with pyproj (PROJ's etmerc) as the reference.

Usage: python3 gen_utm_reference.py > utm_reference.csv
"""
import random

from pyproj import Transformer

random.seed(20211006)
points = [(48.15, 11.57)]
while len(points) < 100:
    lat = random.uniform(-79.9, 83.9)
    lon = random.uniform(-180.0, 179.999)
    points.append((lat, lon))

print("lat,lon,zone,hemisphere,easting,northing")
for lat, lon in points:
    zone = int((lon + 180.0) // 6) + 1
    south = lat < 0
    epsg = (32700 if south else 32600) + zone
    t = Transformer.from_crs("EPSG:4326", f"EPSG:{epsg}", always_xy=True)
    e, n = t.transform(lon, lat)
    print(f"{lat:.12f},{lon:.12f},{zone},{'S' if south else 'N'},{e:.6f},{n:.6f}")
