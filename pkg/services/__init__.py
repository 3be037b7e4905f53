# services/__init__.py
# pacote de serviços (operadores, limites, testemunhas, ruído, multipartido, simulação)
