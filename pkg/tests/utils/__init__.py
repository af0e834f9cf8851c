"""
工具模块测试

配置、日志装饰器与运行清单的测试。
"""
