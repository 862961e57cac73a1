# Exact lattice geometry: rational arithmetic, polytopes, k-empty triangles
