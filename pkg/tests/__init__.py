"""
PolLidar测试包

按包结构组织的单元测试与命令行集成测试。
"""
