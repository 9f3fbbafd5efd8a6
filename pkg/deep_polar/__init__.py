"""Deep polar codes: multi-layer pre-transformed polar encoding, SCL-BPC decoding and BLER simulation."""
