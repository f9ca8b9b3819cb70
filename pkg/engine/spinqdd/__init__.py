# Spin-resolved quantum drift-diffusion engine
